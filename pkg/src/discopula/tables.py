"""Contingency-table documents: parsing, validation, serialisation.

Two input formats are supported.

CSV (two-way tables only)
    A plain grid of counts, one row per level of the first variable.  An
    optional header row and stub column can be skipped with
    ``has_headers=True``.  The tokens ``-``, ``--`` and ``.`` declare a
    structural zero in that cell.

JSON (any dimension)
    ``{"dims": [r1, ..., rd], "counts": [...], "structural_zeros":
    [[i1, ..., id], ...], "labels": [[...], ...]}`` where ``counts`` lists
    all cells flat in column-major order (first coordinate fastest), or
    alternatively ``"cells": [{"index": [i1, ..., id], "count": k}, ...]``
    with 1-based coordinates and unlisted cells implicitly zero.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .arrays import check_shape, flatten_index, unvec, vec
from .errors import ContractError


@dataclass
class TableDocument:
    """A validated count table with declared structural zeros."""

    dims: tuple[int, ...]
    counts: np.ndarray
    structural_zeros: list[tuple[int, ...]] = field(default_factory=list)
    labels: list[list[str]] | None = None

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        """Cells not declared structurally zero."""
        mask = np.ones(self.dims, dtype=bool)
        for cell in self.structural_zeros:
            mask[tuple(c - 1 for c in cell)] = False
        return mask

    def to_dict(self) -> dict:
        out = {
            "dims": list(self.dims),
            "counts": [int(c) for c in vec(self.counts)],
            "structural_zeros": [list(z) for z in self.structural_zeros],
        }
        if self.labels is not None:
            out["labels"] = [list(ax) for ax in self.labels]
        return out


def _validate_document(doc: TableDocument) -> TableDocument:
    doc.dims = check_shape(doc.dims)
    counts = np.asarray(doc.counts)
    if counts.dtype.kind not in "iuf":
        raise ContractError("counts must be numeric")
    if counts.shape != doc.dims:
        raise ContractError(f"counts shape {counts.shape} does not match dims {doc.dims}")
    if np.any(counts < 0):
        raise ContractError("counts must be nonnegative")
    if not np.issubdtype(counts.dtype, np.integer):
        rounded = np.rint(counts)
        if np.max(np.abs(counts - rounded)) > 0:
            raise ContractError("counts must be integers")
        counts = rounded.astype(np.int64)
    doc.counts = counts.astype(np.int64)
    seen = set()
    for cell in doc.structural_zeros:
        cell = tuple(int(c) for c in cell)
        if len(cell) != len(doc.dims):
            raise ContractError(f"structural zero {cell} has wrong dimension")
        flatten_index(doc.dims, cell)  # range check
        if cell in seen:
            raise ContractError(f"structural zero {cell} repeated")
        seen.add(cell)
        if doc.counts[tuple(c - 1 for c in cell)] != 0:
            raise ContractError(
                f"cell {cell} is declared a structural zero but has count "
                f"{int(doc.counts[tuple(c - 1 for c in cell)])}"
            )
    doc.structural_zeros = sorted(seen)
    if doc.labels is not None:
        if len(doc.labels) != len(doc.dims):
            raise ContractError("one label list per axis is required")
        for ax, (names, r) in enumerate(zip(doc.labels, doc.dims)):
            if len(names) != r:
                raise ContractError(
                    f"axis {ax} has {len(names)} labels for {r} levels"
                )
    return doc


_ZERO_TOKENS = {"-", "--", "."}


def _parse_csv(text: str, has_headers: bool) -> TableDocument:
    rows = [row for row in csv.reader(io.StringIO(text)) if any(c.strip() for c in row)]
    if has_headers:
        rows = [row[1:] for row in rows[1:]]
    if not rows:
        raise ContractError("empty CSV document")
    width = len(rows[0])
    grid = np.zeros((len(rows), width), dtype=np.int64)
    zeros: list[tuple[int, int]] = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ContractError(f"CSV row {i + 1} has {len(row)} cells, expected {width}")
        for j, tok in enumerate(row):
            tok = tok.strip()
            if tok in _ZERO_TOKENS:
                zeros.append((i + 1, j + 1))
            else:
                try:
                    grid[i, j] = int(tok)
                except ValueError as exc:
                    raise ContractError(
                        f"CSV cell at row {i + 1}, column {j + 1}: "
                        f"{tok!r} is not a count"
                    ) from exc
    return _validate_document(TableDocument(dims=grid.shape, counts=grid,
                                            structural_zeros=zeros))


def _parse_json(text: str) -> TableDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ContractError(f"invalid JSON: {exc}") from exc
    if "dims" not in data:
        raise ContractError('JSON document needs a "dims" field')
    dims = check_shape(data["dims"])
    total = int(np.prod(dims))
    if "counts" in data:
        flat = np.asarray(data["counts"])
        if flat.ndim != 1 or flat.size != total:
            raise ContractError(f'"counts" must list all {total} cells flat')
        counts = unvec(flat, dims)
    elif "cells" in data:
        counts = np.zeros(dims, dtype=np.int64)
        seen = set()
        for rec in data["cells"]:
            try:
                index = tuple(int(c) for c in rec["index"])
                value = rec["count"]
            except (KeyError, TypeError) as exc:
                raise ContractError(
                    'each cell record needs "index" and "count"'
                ) from exc
            flatten_index(dims, index)  # range check
            if index in seen:
                raise ContractError(f"cell {index} appears twice")
            seen.add(index)
            counts[tuple(c - 1 for c in index)] = value
    else:
        raise ContractError('JSON document needs "counts" or "cells"')
    doc = TableDocument(dims=dims, counts=counts,
                        structural_zeros=[tuple(z) for z in data.get("structural_zeros", [])],
                        labels=data.get("labels"))
    return _validate_document(doc)


def parse_table(document: str | bytes, fmt: str, *, has_headers: bool = False) -> TableDocument:
    """Parse a table document.  ``fmt`` is ``"csv"`` or ``"json"``."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    if fmt == "csv":
        return _parse_csv(document, has_headers)
    if fmt == "json":
        return _parse_json(document)
    raise ContractError(f"unknown format {fmt!r} (expected 'csv' or 'json')")


def emit_table(doc: TableDocument, *, indent: int | None = None) -> str:
    """Serialise a document to the canonical JSON schema."""
    return json.dumps(doc.to_dict(), indent=indent)
