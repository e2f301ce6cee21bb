"""Directed-graph helpers on integer vertices ``0..n-1``."""

from collections import deque


def strongly_connected_components(n, successors):
    """Tarjan's algorithm, iterative.

    ``successors(v)`` returns an iterable of out-neighbours. Components are
    returned in reverse topological order (sink components first), each as a
    sorted list of vertices.
    """
    index = [None] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = 0

    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] is None:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
    return components


def reachable(sources, successors):
    """Set of vertices reachable from ``sources`` (sources included)."""
    seen = set(sources)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in successors(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen
