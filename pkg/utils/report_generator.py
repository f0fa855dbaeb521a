import csv
import json
import math
import os
from datetime import datetime
from typing import Iterable, List, Sequence

import numpy as np
import psutil

SUMMARY_HEADER = ["name", "status", "measured", "tolerance"]


def format_value(value, digits=17):
    """Render one CSV cell: floats with fixed significant digits, None as empty"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ""
        return f"{value:.{digits}g}"
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], digits=17):
    """Write a headed CSV with '\\n' line endings and fixed float formatting"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_value(value, digits) for value in row])
    return path


class CheckReportGenerator:
    """Collect check results and write summary.csv and report.json"""

    def __init__(self, report_dir=None, summary_file="summary.csv", report_file="report.json"):
        """Initialize report generator with optional report directory"""
        if report_dir is None:
            self.report_dir = os.path.join(os.path.dirname(__file__), '..', 'output')
        else:
            self.report_dir = report_dir

        os.makedirs(self.report_dir, exist_ok=True)

        self.summary_file = summary_file
        self.report_file = report_file
        self.check_results = []
        self.execution_summary = {
            'start_time': None,
            'end_time': None,
            'total_checks': 0,
            'passed': 0,
            'failed': 0,
            'errors': 0
        }
        self.peak_memory_mb = memory_mb()

    def start_execution(self):
        """Mark the start of check execution"""
        self.execution_summary['start_time'] = datetime.now()

    def end_execution(self):
        """Mark the end of check execution"""
        self.execution_summary['end_time'] = datetime.now()

    def add_check_result(self, result):
        """Add a CheckResult to the report"""
        self.check_results.append(result)
        self.execution_summary['total_checks'] += 1
        self._sample_memory()
        if result.passed:
            self.execution_summary['passed'] += 1
        else:
            self.execution_summary['failed'] += 1

    def add_error(self, name, error):
        """Record a check that could not run at all"""
        self.execution_summary['errors'] += 1
        self.check_results.append(_ErroredCheck(name, str(error)))

    @property
    def all_passed(self):
        return self.execution_summary['failed'] == 0 and self.execution_summary['errors'] == 0

    def summary_rows(self) -> List[list]:
        return [result.summary_row() for result in self.check_results]

    def write_summary_csv(self):
        """Write summary.csv, one row per check in insertion order"""
        path = os.path.join(self.report_dir, self.summary_file)
        write_csv(path, SUMMARY_HEADER, self.summary_rows())
        print(f"Summary written: {path}")
        return path

    def export_json_report(self):
        """Export check results, the execution summary and peak memory as JSON"""
        json_path = os.path.join(self.report_dir, self.report_file)

        report_data = {
            'execution_summary': self.execution_summary,
            'duration': self._get_execution_duration(),
            'success_percentage': self._get_success_percentage(),
            'peak_memory_mb': self.peak_memory_mb,
            'check_results': [result.to_dict() for result in self.check_results]
        }

        try:
            with open(json_path, 'w', encoding='utf-8') as file:
                json.dump(report_data, file, indent=4, default=_json_default)
            print(f"JSON report exported: {json_path}")
            return json_path
        except OSError as e:
            print(f"Error exporting JSON report: {str(e)}")
            return None

    def _sample_memory(self):
        self.peak_memory_mb = max(self.peak_memory_mb, memory_mb())

    def _get_execution_duration(self):
        """Get execution duration as formatted string"""
        if self.execution_summary['start_time'] and self.execution_summary['end_time']:
            duration = self.execution_summary['end_time'] - self.execution_summary['start_time']
            return str(duration).split('.')[0]  # Remove microseconds
        return "N/A"

    def _get_success_percentage(self):
        """Calculate success percentage"""
        if self.execution_summary['total_checks'] == 0:
            return 0
        return (self.execution_summary['passed'] / self.execution_summary['total_checks']) * 100


class _ErroredCheck:
    """Summary stand-in for a check that raised before producing a result"""

    passed = False
    status = "error"

    def __init__(self, name, message):
        self.name = name
        self.message = message

    def summary_row(self):
        return [self.name, self.status, self.message, ""]

    def to_dict(self):
        return {"name": self.name, "status": self.status, "error": self.message}


def memory_mb():
    """Resident set size of this process in MiB"""
    return round(psutil.Process().memory_info().rss / (1024 * 1024), 2)


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)
