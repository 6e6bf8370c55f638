"""
Result tables and how they are written

WHAT THIS FILE DOES:
- Table: header + rows + footer (summary values such as a KS distance)
- render_csv: header row, ',' separator, '.' decimal, one row per line
- render_json: {"metadata": ..., "columns": {name: [...]}, "footer": ...}
  through TableSerializer and DRF's JSONRenderer
- output_path: relative --output paths land in settings.SPIKEDF['OUTPUT_DIR']

Numbers are printed with 15 significant digits through format(), which never
consults the locale, so the same flags always give the same bytes.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from django.conf import settings
from rest_framework.renderers import JSONRenderer

from .serializers import TableSerializer


@dataclass
class Table:
    columns: List[str]
    rows: List[list] = field(default_factory=list)
    footer: Dict[str, Any] = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f'row has {len(values)} values for {len(self.columns)} columns')
        self.rows.append([plain(v) for v in values])

    def column(self, name) -> list:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def plain(value):
    """numpy scalars and float subclasses to plain Python values."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if not math.isfinite(value):
            return repr(value)
        return format(value, '.15g')
    return str(value)


def render_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def render_json(table: Table, metadata: dict) -> str:
    data = TableSerializer({
        'metadata': metadata,
        'table': table,
        'footer': {key: plain(value) for key, value in table.footer.items()},
    }).data
    return JSONRenderer().render(data).decode('utf-8') + '\n'


def output_path(name) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = Path(settings.SPIKEDF['OUTPUT_DIR']) / path
    return path


def write_text(name, text: str) -> Path:
    path = output_path(name)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as file:
        file.write(text)
    return path
