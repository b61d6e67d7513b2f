"""
ReportWriter - Write run artifacts: metrics.json, rounds.csv, config_echo.json,
codes.csv and the sweep comparison table.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..federation.state import RoundMetrics
from ..retrieval.database import CodeDatabase

logger = logging.getLogger(__name__)

ROUNDS_COLUMNS = ['round', 'map', 'tl_local', 'tl_global', 'quan', 'adv_d', 'adv_g']
COMPARISON_COLUMNS = ['axis', 'value', 'status', 'final_map', 'error']


def _cell(value) -> str:
    """CSV cell: repr for floats so reruns compare byte for byte, empty for None."""
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ReportWriter:
    """Writes the output files of one run into a directory."""

    def __init__(self, output_dir):
        """
        Args:
            output_dir: Directory for the run's files (created if missing)
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _write_json(self, name: str, data: Dict) -> Path:
        path = self.output_dir / name
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2)
        return path

    def write_config_echo(self, config: Dict) -> Path:
        return self._write_json('config_echo.json', config)

    def write_rounds_csv(self, history: Sequence[RoundMetrics]) -> Path:
        """One row per round: mAP (blank when not evaluated) and client-mean losses."""
        path = self.output_dir / 'rounds.csv'
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(ROUNDS_COLUMNS)
            for m in history:
                row = m.to_dict()
                writer.writerow([_cell(row[c]) for c in ROUNDS_COLUMNS])
        return path

    def write_metrics(self, config: Dict, history: Sequence[RoundMetrics],
                      final_report: Optional[Dict] = None) -> Path:
        """
        metrics.json: config echo, per-round history and the final retrieval report.

        Args:
            config: Serialized run configuration
            history: Round metrics
            final_report: mAP, PR curve and P/R@N of the final head
        """
        data = {
            'config': config,
            'rounds': [m.to_dict() for m in history],
            'map_curve': [{'round': m.round, 'map': m.map} for m in history if m.map is not None],
            'final': final_report or {},
        }
        return self._write_json('metrics.json', data)

    def write_codes_csv(self, silos: Sequence[CodeDatabase]) -> Path:
        """Database codes with their owner client, as bit strings of 0/1."""
        path = self.output_dir / 'codes.csv'
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['owner', 'position', 'code', 'labels'])
            for silo_id, db in enumerate(silos):
                owner = db.owner if db.owner is not None else silo_id
                for i in range(db.size):
                    code = ''.join('1' if bit > 0 else '0' for bit in db.codes[i])
                    labels = ' '.join(str(int(v)) for v in db.labels[i])
                    writer.writerow([owner, i, code, labels])
        return path

    def write_comparison_csv(self, rows: List[Dict]) -> Path:
        """Sweep summary, one row per swept value."""
        path = self.output_dir / 'comparison.csv'
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(COMPARISON_COLUMNS)
            for row in rows:
                writer.writerow([_cell(row.get(c)) for c in COMPARISON_COLUMNS])
        logger.info("Comparison table written to %s", path)
        return path
