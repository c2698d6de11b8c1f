"""Graphviz rendering of annotated derivation trees."""

from __future__ import annotations

from .lemma import AnnotatedTree


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(at: AnnotatedTree, name: str = "derivation") -> str:
    """DOT digraph: d-branch nodes double-circled, e-branch nodes shaded,
    dashed edges from each d-branch node to its d-parent, leaves labeled
    ``letter@position`` with ``[D]``/``[X]`` badges for marked positions."""
    tree, m = at.tree, at.marking
    dist, excl = set(m.distinguished), set(m.excluded)
    lines = [f"digraph {name} {{", "  node [fontname=Helvetica];"]
    for i, label in enumerate(tree.labels):
        attrs = []
        if tree.leaf[i]:
            pos = tree.position(i)
            badge = " [D]" if pos in dist else " [X]" if pos in excl else ""
            attrs.append(f"label={_quote(f'{label}@{pos}{badge}')}")
            attrs.append("shape=box")
        else:
            attrs.append(f"label={_quote(label)}")
            attrs.append("shape=doublecircle" if at.d_branch[i] else "shape=circle")
        if at.e_branch[i]:
            attrs.append("style=filled")
            attrs.append("fillcolor=gray80")
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for i, kids in enumerate(tree.children):
        for c in kids:
            lines.append(f"  n{i} -> n{c};")
    for i, p in enumerate(at.d_parent):
        if at.d_branch[i] and p is not None:
            lines.append(f"  n{i} -> n{p} [style=dashed, constraint=false, color=blue];")
    lines.append("}")
    return "\n".join(lines) + "\n"
