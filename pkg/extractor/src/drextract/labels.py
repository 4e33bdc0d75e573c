"""Grade labels from a two-column CSV (APTOS release format).

Rows are ``id_code,diagnosis`` where the id is the image filename without
extension and the diagnosis is an integer grade 0-4.  A header row is
detected and skipped.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import DataError, WriteError

N_GRADES = 5  # 0 none .. 4 proliferative


def read_labels_csv(path) -> dict[str, int]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise WriteError(f"cannot read labels {path}: {exc}") from exc
    labels: dict[str, int] = {}
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise DataError(f"{path}:{lineno}: expected two columns, got {len(row)}")
        id_code, diagnosis = row[0].strip(), row[1].strip()
        if lineno == 1 and not diagnosis.lstrip("-").isdigit():
            continue  # header row
        try:
            grade = int(diagnosis)
        except ValueError:
            raise DataError(
                f"{path}:{lineno}: diagnosis must be an integer, got {diagnosis!r}"
            ) from None
        if not 0 <= grade < N_GRADES:
            raise DataError(
                f"{path}:{lineno}: grade must be in [0, {N_GRADES - 1}], got {grade}"
            )
        if id_code in labels:
            raise DataError(f"{path}:{lineno}: duplicate id {id_code!r}")
        labels[id_code] = grade
    if not labels:
        raise DataError(f"no labels in {path}")
    return labels
