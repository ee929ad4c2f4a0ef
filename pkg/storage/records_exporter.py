import csv
import os
from typing import Dict, Iterable, List, TextIO


def format_record(record: Dict) -> str:
    """One key=value per line; values are flattened to a single line."""
    lines = []
    for key, value in record.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        text = str(value).replace("\n", " ")
        lines.append(f"{key}={text}")
    return "\n".join(lines)


class RecordsWriter:
    """Writes machine-parseable record groups separated by blank lines."""

    def __init__(self, stream: TextIO):
        self.stream = stream
        self._written = 0

    def write(self, record: Dict) -> None:
        if self._written:
            self.stream.write("\n")
        self.stream.write(format_record(record) + "\n")
        self._written += 1

    def write_all(self, records: Iterable[Dict]) -> None:
        for record in records:
            self.write(record)


def parse_records(text: str) -> List[Dict[str, str]]:
    records: List[Dict[str, str]] = []
    current: Dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            if current:
                records.append(current)
                current = {}
            continue
        key, _, value = line.partition("=")
        current[key] = value
    if current:
        records.append(current)
    return records


BENCH_COLUMNS = ["genus", "nodes", "seed", "traversals", "peak_bits", "ntbws_visited", "delivered"]


class BenchCsvExporter:
    def __init__(self, filepath: str = "bench_export.csv"):
        self.filepath = filepath
        self._ensure_header()

    def _ensure_header(self):
        if os.path.exists(self.filepath):
            return
        with open(self.filepath, "w", newline="") as f:
            csv.writer(f).writerow(BENCH_COLUMNS)

    def write_row(self, row: Dict):
        with open(self.filepath, "a", newline="") as f:
            csv.writer(f).writerow([row.get(c, "") for c in BENCH_COLUMNS])
