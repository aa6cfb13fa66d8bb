"""Flat-file graph format and corpus directories.

One graph per file::

    #thg v1
    #label BLT
    Put | bacon | pan | 3 5
    MixInto | onion,garlic,oil | bowl | 7 9

Fields are pipe-separated: predicate, comma-separated heads, tails, then
`start end`.  `#` starts a comment; `|` and `,` are reserved and rejected
inside names.  A corpus is a directory of `*.thg` files read in filename
order.
"""
from __future__ import annotations

import os

from .hypergraph import GraphError, Interval, TemporalHypergraph

HEADER = "#thg v1"
RESERVED = ("|", ",", "\n", "\t")


class DataFormatError(ValueError):
    """Parse or validation failure, with file/line context in the message."""


def _check_name(name: str, where: str) -> str:
    if not name:
        raise DataFormatError(f"{where}: empty name")
    for ch in RESERVED:
        if ch in name:
            raise DataFormatError(f"{where}: reserved character {ch!r} in {name!r}")
    return name


def save_graph(graph: TemporalHypergraph, path, label: str | None = None) -> None:
    lines = [HEADER]
    if label is not None:
        lines.append(f"#label {label}")
    for event in graph.events:
        pred, heads, tails = graph.event_names(event.event_id)
        _check_name(pred, path)
        for name in heads + tails:
            _check_name(name, path)
        lines.append(
            f"{pred} | {','.join(heads)} | {','.join(tails)} | "
            f"{event.interval.start} {event.interval.end}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph(
    path, split_multi_tail: bool = False
) -> tuple[TemporalHypergraph, str | None]:
    graph = TemporalHypergraph()
    label: str | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#label"):
                label = line[len("#label"):].strip()
                continue
            if line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 4:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 4 pipe-separated fields, "
                    f"got {len(parts)}"
                )
            pred, heads_text, tails_text, time_text = parts
            heads = [h.strip() for h in heads_text.split(",")]
            tails = [t.strip() for t in tails_text.split(",")]
            if any(not h for h in heads) or not heads_text:
                raise DataFormatError(f"{path}:{lineno}: empty head entity")
            if any(not t for t in tails) or not tails_text:
                raise DataFormatError(f"{path}:{lineno}: empty tail entity")
            ticks = time_text.split()
            if len(ticks) != 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected '<start> <end>', got {time_text!r}"
                )
            try:
                interval = Interval(int(ticks[0]), int(ticks[1]))
            except (ValueError, GraphError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            if len(tails) > 1 and not split_multi_tail:
                raise DataFormatError(
                    f"{path}:{lineno}: multi-tail event (pass split_multi_tail "
                    f"to expand into single-tail edges)"
                )
            try:
                if len(tails) == 1:
                    graph.add_event(pred, heads, tails, interval)
                else:
                    for tail in tails:
                        graph.add_event(pred, heads, [tail], interval)
            except GraphError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    return graph, label


def save_corpus(dirpath, graphs, labels=None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    width = max(4, len(str(len(graphs))))
    for i, graph in enumerate(graphs):
        label = labels[i] if labels is not None else None
        save_graph(graph, os.path.join(dirpath, f"g{i:0{width}d}.thg"), label)


def load_corpus(
    dirpath, split_multi_tail: bool = False
) -> tuple[list[TemporalHypergraph], list[str | None]]:
    names = sorted(n for n in os.listdir(dirpath) if n.endswith(".thg"))
    if not names:
        raise DataFormatError(f"{dirpath}: no .thg files found")
    graphs = []
    labels = []
    for name in names:
        graph, label = load_graph(os.path.join(dirpath, name), split_multi_tail)
        graphs.append(graph)
        labels.append(label)
    return graphs, labels
