"""CSV parsing and serialization for item catalogs, duels, and tags.

Expected layouts (UTF-8, header row required):

    items.csv  item_id, group, category, external_ref
    duels.csv  duel_id, category, dimension, item_a, item_b, winner, rater_id
    tags.csv   duel_id, item_id, rater_id, raw_tag

Other layouts can be adapted with a column map (JSON object mapping the
expected column name to the actual one in the file).
"""

from __future__ import annotations

import csv
import json
from typing import Mapping, Sequence

from .errors import ParseError, ReferentialError, ValidationError
from .records import GROUP_A, GROUP_B, DuelRecord, ItemCatalog, ItemRecord, TagRecord

ITEM_COLUMNS = ("item_id", "group", "category", "external_ref")
DUEL_COLUMNS = (
    "duel_id",
    "category",
    "dimension",
    "item_a",
    "item_b",
    "winner",
    "rater_id",
)
TAG_COLUMNS = ("duel_id", "item_id", "rater_id", "raw_tag")


def load_column_map(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as f:
        mapping = json.load(f)
    if not isinstance(mapping, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()
    ):
        raise ValidationError(f"{path}: column map must be a string-to-string object")
    return mapping


def _read_rows(path, required, column_map, optional=()):
    column_map = dict(column_map or {})
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file, header row required")
        header = set(reader.fieldnames)
        for col in required:
            if column_map.get(col, col) not in header:
                raise ParseError(
                    f"{path}: missing required column {column_map.get(col, col)!r}"
                )
        rows = []
        for lineno, raw in enumerate(reader, 2):
            row = {}
            for col in (*required, *optional):
                src = column_map.get(col, col)
                value = raw.get(src)
                if value is None and col in required:
                    raise ParseError("row has too few fields", line=lineno)
                row[col] = value.strip() if value is not None else None
            rows.append((lineno, row))
    return rows


def parse_items(path, column_map: Mapping[str, str] | None = None) -> ItemCatalog:
    """Read an item catalog; duplicate ids and unknown groups are rejected."""
    records = []
    for lineno, row in _read_rows(
        path, ITEM_COLUMNS[:3], column_map, optional=("external_ref",)
    ):
        try:
            records.append(
                ItemRecord(
                    item_id=row["item_id"],
                    group=row["group"],
                    category=row["category"],
                    external_ref=row["external_ref"] or None,
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    try:
        return ItemCatalog(records)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def parse_duels(
    path,
    catalog: ItemCatalog | None = None,
    column_map: Mapping[str, str] | None = None,
) -> list[DuelRecord]:
    """Read duel records. With a catalog, item references and group sides
    are validated; without one, only structural checks apply."""
    duels = []
    for lineno, row in _read_rows(path, DUEL_COLUMNS, column_map):
        try:
            duel = DuelRecord(**row)
        except (ValidationError, TypeError) as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from exc
        if catalog is not None:
            for item in (duel.item_a, duel.item_b):
                if item not in catalog:
                    raise ReferentialError(
                        f"{path}: line {lineno}: unknown item {item!r}"
                    )
            ga = catalog.group_of(duel.item_a)
            gb = catalog.group_of(duel.item_b)
            if ga != GROUP_A or gb != GROUP_B:
                raise ValidationError(
                    f"{path}: line {lineno}: item_a must be group A and item_b "
                    f"group B (got {ga}, {gb})"
                )
        duels.append(duel)
    return duels


def parse_tags(path, column_map: Mapping[str, str] | None = None) -> list[TagRecord]:
    tags = []
    for lineno, row in _read_rows(path, TAG_COLUMNS, column_map):
        try:
            tags.append(
                TagRecord(
                    duel_id=row["duel_id"],
                    item_id=row["item_id"],
                    rater_id=row["rater_id"],
                    raw_text=row["raw_tag"],
                )
            )
        except ValidationError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from exc
    return tags


def write_items(path, catalog: ItemCatalog) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ITEM_COLUMNS)
        for r in catalog.records:
            writer.writerow([r.item_id, r.group, r.category, r.external_ref or ""])


def write_duels(path, duels: Sequence[DuelRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(DUEL_COLUMNS)
        for d in duels:
            writer.writerow(
                [d.duel_id, d.category, d.dimension, d.item_a, d.item_b, d.winner,
                 d.rater_id]
            )


def write_tags(path, tags: Sequence[TagRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TAG_COLUMNS)
        for t in tags:
            writer.writerow([t.duel_id, t.item_id, t.rater_id, t.raw_text])
