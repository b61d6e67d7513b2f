"""Run artifacts written to disk."""

from .report_writer import COMPARISON_COLUMNS, ROUNDS_COLUMNS, ReportWriter

__all__ = ['COMPARISON_COLUMNS', 'ROUNDS_COLUMNS', 'ReportWriter']
