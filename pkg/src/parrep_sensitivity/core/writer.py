"""
Report writer.

Summaries and sensitivity reports are written as YAML documents; histogram,
bound, path and cycle-log tables as comma-separated records. Every file
starts with a header naming what it mirrors, and floats are written in
shortest round-trip form so identical results give identical bytes.
"""

import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import yaml

from ..utils.file_handler import FileHandler


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into YAML-safe builtins."""
    if isinstance(value, Mapping):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class ReportWriter:
    """
    Writer for experiment outputs under one directory.

    Attributes:
        output_dir: Directory receiving the report files
        written: Paths written so far, in order
    """

    def __init__(self, output_dir: Path, header: str = "") -> None:
        self.output_dir = output_dir
        self.header = header
        self.written: List[Path] = []

    def _header_lines(self, header: Optional[str]) -> str:
        text = header if header is not None else self.header
        if not text:
            return ""
        return "".join(f"# {line}\n" for line in text.splitlines())

    def write_yaml(self, name: str, data: Mapping[str, Any], header: Optional[str] = None) -> Path:
        """
        Write a structured document.

        Args:
            name: File name inside the output directory
            data: Mapping to serialize
            header: Comment header; defaults to the writer header

        Returns:
            Path of the written file
        """
        body = yaml.safe_dump(to_plain(data), sort_keys=False, default_flow_style=False)
        return self._write(name, self._header_lines(header) + body)

    def write_csv(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        header: Optional[str] = None,
    ) -> Path:
        """
        Write a comma-separated table.

        Args:
            name: File name inside the output directory
            columns: Column names
            rows: Records in column order
            header: Comment header; defaults to the writer header

        Returns:
            Path of the written file
        """
        buffer = io.StringIO()
        buffer.write(self._header_lines(header))
        table = csv.writer(buffer, lineterminator="\n")
        table.writerow(columns)
        for row in rows:
            table.writerow(
                [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
            )
        return self._write(name, buffer.getvalue())

    def write_records(
        self, name: str, records: Sequence[Dict[str, Any]], header: Optional[str] = None
    ) -> Path:
        """Write dict records as a table; columns follow the first record."""
        columns = list(records[0].keys()) if records else []
        return self.write_csv(name, columns, ([r[c] for c in columns] for r in records), header)

    def _write(self, name: str, text: str) -> Path:
        path = FileHandler.write_text(self.output_dir / name, text)
        self.written.append(path)
        return path
