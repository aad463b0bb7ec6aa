"""File formats: household CSV, JSON artifacts, menu configuration.

The household CSV is the interchange format between simulation and
estimation.  Every JSON artifact carries a schema version and the fully
resolved run configuration so a run can be reproduced from its output
alone.
"""

from __future__ import annotations

import csv
import json

from .estimation import EstimationResult, param_names, natural_vector
from .menus import Bundle, MenuConfig, default_menu
from .simulation import Household

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "household_id",
    "base_price_collision",
    "base_price_comprehensive",
    "claim_prob_collision",
    "claim_prob_comprehensive",
    "choice_collision_deductible",
    "choice_comprehensive_deductible",
)


class DataFormatError(ValueError):
    """Parse or validation failure pinned to file, row, and column."""

    def __init__(self, path, row, column, message):
        self.path = str(path)
        self.row = row
        self.column = column
        super().__init__(f"{self.path}:{row}: column {column!r}: {message}")


def _deductible_index(menu, dollars, path, row, column):
    deds = [int(d) for d in menu.deductibles]
    if dollars not in deds:
        raise DataFormatError(
            path, row, column, f"deductible {dollars} not offered (menu: {deds})"
        )
    return deds.index(dollars)


def read_households(path, cfg: MenuConfig) -> list:
    """Parse the household CSV into Household records.

    Choice columns may be empty (unlabeled data); when present they must
    name deductibles offered by the menu, in integer dollars.
    """
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(path, 1, CSV_COLUMNS[0], "empty file")
        if tuple(h.strip() for h in header) != CSV_COLUMNS:
            raise DataFormatError(
                path, 1, ",".join(header), f"header must be {','.join(CSV_COLUMNS)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(CSV_COLUMNS):
                raise DataFormatError(
                    path, lineno, CSV_COLUMNS[0],
                    f"expected {len(CSV_COLUMNS)} fields, got {len(rec)}",
                )
            vals = {}
            for col, cell in zip(CSV_COLUMNS, rec):
                cell = cell.strip()
                if col.startswith("choice_"):
                    if cell == "":
                        vals[col] = None
                        continue
                    try:
                        vals[col] = int(cell)
                    except ValueError:
                        raise DataFormatError(
                            path, lineno, col, f"not an integer: {cell!r}"
                        )
                elif col == "household_id":
                    try:
                        vals[col] = int(cell)
                    except ValueError:
                        raise DataFormatError(
                            path, lineno, col, f"not an integer: {cell!r}"
                        )
                else:
                    try:
                        vals[col] = float(cell)
                    except ValueError:
                        raise DataFormatError(
                            path, lineno, col, f"not a number: {cell!r}"
                        )
            chosen = (
                vals["choice_collision_deductible"],
                vals["choice_comprehensive_deductible"],
            )
            if (chosen[0] is None) != (chosen[1] is None):
                raise DataFormatError(
                    path, lineno, "choice_comprehensive_deductible",
                    "choice must name both deductibles or neither",
                )
            choice = None
            if chosen[0] is not None:
                choice = Bundle(
                    _deductible_index(
                        cfg.collision, chosen[0], path, lineno,
                        "choice_collision_deductible",
                    ),
                    _deductible_index(
                        cfg.comprehensive, chosen[1], path, lineno,
                        "choice_comprehensive_deductible",
                    ),
                )
            try:
                out.append(Household(
                    id=vals["household_id"],
                    x_i=vals["base_price_collision"],
                    x_ii=vals["base_price_comprehensive"],
                    mu_i=vals["claim_prob_collision"],
                    mu_ii=vals["claim_prob_comprehensive"],
                    choice=choice,
                ))
            except ValueError as exc:
                raise DataFormatError(path, lineno, "household_id", str(exc))
    return out


def write_households(path, pop, cfg: MenuConfig) -> None:
    """Write households to CSV; deductibles as integer dollars.

    Uses repr-roundtrip float formatting so read/write is lossless.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for h in sorted(pop, key=lambda h: h.id):
            if h.choice is None:
                d_i, d_ii = "", ""
            else:
                dd = cfg.bundle_deductibles(h.choice)
                d_i, d_ii = int(dd[0]), int(dd[1])
            writer.writerow([
                int(h.id), repr(float(h.x_i)), repr(float(h.x_ii)),
                repr(float(h.mu_i)), repr(float(h.mu_ii)), d_i, d_ii,
            ])


def write_json(path, payload: dict, config: dict) -> None:
    """Write a JSON artifact stamped with schema version and run config."""
    doc = {"schema_version": SCHEMA_VERSION, "config": config}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DataFormatError(
            path, 1, "schema_version", f"expected {SCHEMA_VERSION}, got {version}"
        )
    return doc


def load_menu(path) -> MenuConfig:
    """Menu configuration file: JSON keyed by context."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(path, exc.lineno, "-", exc.msg)
    try:
        return MenuConfig.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(path, 1, "-", f"invalid menu config: {exc}")


def default_menu_json() -> str:
    """The built-in menu as a printable configuration document."""
    return json.dumps(default_menu().to_dict(), indent=2, sort_keys=True)


def result_to_dict(res: EstimationResult) -> dict:
    """EstimationResult as a JSON-ready mapping, parameters by name."""
    cfg = res.params.cfg
    names = param_names(cfg)
    values = natural_vector(res.params)
    estimates = {n: float(v) for n, v in zip(names, values)}
    out = {
        "loglik": float(res.loglik),
        "converged": bool(res.converged),
        "n_evals": int(res.n_evals),
        "n_floored": int(res.n_floored),
        "multistart_logliks": [float(v) for v in res.multistart_logliks],
        "estimates": estimates,
        "params": res.params.to_dict(),
    }
    if res.intervals is not None:
        out["intervals"] = {
            k: [float(v[0]), float(v[1])] for k, v in res.intervals.items()
        }
    return out
