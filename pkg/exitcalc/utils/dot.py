"""Graphviz output for presentations and homotopy categories."""
from graphviz import Digraph


def presentation_dot(pres, name='presentation'):
    """Shape of a presentation; marked edges are dashed."""
    graph = Digraph(name, graph_attr={'rankdir': 'BT'})
    for x in pres.shape.elements:
        graph.node(x, label=f'{x}, {pres.strat(x)}')
    marks = set(pres.marks)
    for x, y in pres.shape.hasse:
        if (x, y) in marks:
            graph.edge(x, y, style='dashed')
        else:
            graph.edge(x, y)
    return graph.source


def hocat_dot(report, name='hocat'):
    """One arrow per non-identity morphism of the localized category."""
    category = report.category
    graph = Digraph(name, graph_attr={'rankdir': 'BT'})
    for x in category.objects:
        graph.node(x, label=x)
    identities = set(category.identities.values())
    for (x, y), morphisms in sorted(category.homs.items()):
        for f in morphisms:
            if f in identities:
                continue
            if category.is_invertible(f):
                graph.edge(x, y, label=f, style='dashed')
            else:
                graph.edge(x, y, label=f)
    return graph.source
