"""This module provides a read-only table of result rows."""
import csv
import io
from collections.abc import Sequence
from typing import Any, Dict, List, Optional, Tuple, Union

from xygibbs.helpers import format_number


def _render(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


class Table(Sequence):
    """Rows of a sweep, in the order they were requested."""

    def __init__(self, columns: List[str], rows: List[Tuple]):
        """Construct a :class:`Table <Table>`.

        :param list columns:
            Column names.
        :param list rows:
            Tuples with one entry per column.
        """
        self.columns = list(columns)
        self.rows = [tuple(row) for row in rows]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f'row {row!r} does not match columns {self.columns!r}')

    def column(self, name: str) -> List[Any]:
        """All values of one column.

        :param str name:
            The column name.
        :rtype: list
        """
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def first(self) -> Optional[Tuple]:
        try:
            return self.rows[0]
        except IndexError:
            return None

    def last(self) -> Optional[Tuple]:
        try:
            return self.rows[-1]
        except IndexError:
            return None

    def as_dicts(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self) -> str:
        """Render the table as CSV with 17 significant digits.

        The output depends only on the row values, so identical inputs give
        byte-identical text.

        :rtype: str
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_render(v) for v in row])
        return buffer.getvalue()

    def __getitem__(self, i: Union[slice, int]):
        return self.rows[i]

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"<Table: {self.columns} x {len(self.rows)}>"
