import logging
from typing import Optional

import click
import pandas as pd

from app.models import EnumerationResult, McEstimate, MtdAction, PhaseDiagram, SolveReport, SweepResult, TurningPoint
from app.services.mtd_builder import STATE_ORDER

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"


def sweep_frame(sweep: SweepResult, state: str = "E") -> pd.DataFrame:
    """One row per grid point: cost percentage, the three action values at `state`, the policy everywhere."""
    rows = []
    for point in sweep.grid:
        row = {"cost_pct": point.fraction * 100}
        for action in MtdAction:
            # NaN marks an action withheld at `state`
            row[f"V_{action.value.lower()}_{state}"] = point.q_values[state].get(action.value, float("nan"))
        for s in STATE_ORDER:
            row[f"opt_{s}"] = point.actions[s]
        rows.append(row)
    return pd.DataFrame(rows)


def phase_frame(diagram: PhaseDiagram) -> pd.DataFrame:
    rows = [
        {"x_pct": fx * 100, "y_pct": fy * 100, "opt_action": diagram.actions[i][j]}
        for i, fx in enumerate(diagram.x_fractions)
        for j, fy in enumerate(diagram.y_fractions)
    ]
    return pd.DataFrame(rows, columns=["x_pct", "y_pct", "opt_action"])


def turning_point_frame(turning: TurningPoint) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "state": turning.state,
                "from": turning.from_action,
                "to": turning.to_action,
                "lo": turning.bracket_low,
                "hi": turning.bracket_high,
            }
        ]
    )


def report_frame(report: SolveReport) -> pd.DataFrame:
    rows = []
    for state, value in report.value.values.items():
        row = {"state": state, "value": value, "action": report.policy[state]}
        for action in MtdAction:
            row[f"Q_{action.value.lower()}"] = report.q_table[state].get(action.value, float("nan"))
        rows.append(row)
    return pd.DataFrame(rows)


def enumeration_frame(result: EnumerationResult) -> pd.DataFrame:
    rows = []
    for entry in result.table:
        row = {f"pi_{s}": a for s, a in entry.policy.assignment.items()}
        row.update({f"V_{s}": v for s, v in entry.value.values.items()})
        row["attains_envelope"] = entry.policy == result.best_policy or entry.policy in result.ties
        rows.append(row)
    return pd.DataFrame(rows)


def estimate_frame(estimate: McEstimate, solver_value: float) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "state": estimate.state,
                "episodes": estimate.episodes,
                "horizon": estimate.horizon,
                "seed": estimate.seed,
                "mean_return": estimate.mean_return,
                "standard_error": estimate.standard_error,
                "solver_value": solver_value,
            }
        ]
    )


def to_csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")


def write_csv(frame: pd.DataFrame, output: Optional[str] = None) -> None:
    """Write `frame` to `output`, or to stdout when no path is given."""
    text = to_csv_text(frame)
    if output is None:
        click.echo(text, nl=False)
        return
    with open(output, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info("wrote %d rows to %s", len(frame), output)
