"""
Plot data for separatrices: samples of a saddle's axis pushed through the
transition maps leaving that saddle, written as `x,y` CSV.
"""
import csv
from pathlib import Path
from typing import Literal, Union

import numpy as np

from schemes.mapspec import MapSpec
from services.moduli import evaluate
from utils.errors import SchemeKitError
from utils.logging import get_logger

logger = get_logger(__name__)


def emit_separatrix_polyline(
    ms: MapSpec,
    saddle: str,
    which: Literal["stable", "unstable"],
    n_samples: int = 50,
    sample_range: tuple[float, float] = (-1.0, 1.0),
) -> list[tuple[float, float]]:
    """
    Image of the stable axis {(0, s)} or the unstable axis {(s, 0)} of a
    saddle chart under every transition leaving the saddle.

    Returns:
        (x, y) samples in target-chart coordinates, transition by transition;
        empty when no transition leaves the saddle
    """
    if saddle not in {c.saddle for c in ms.saddles}:
        raise SchemeKitError(f"unknown saddle '{saddle}'")
    if n_samples < 1:
        raise SchemeKitError("n_samples must be positive")

    s = np.linspace(sample_range[0], sample_range[1], n_samples)
    zeros = np.zeros_like(s)
    x, y = (zeros, s) if which == "stable" else (s, zeros)

    points: list[tuple[float, float]] = []
    transitions = [g for g in ms.transitions if g.source == saddle]
    if not transitions:
        logger.warning(f"No transition leaves saddle '{saddle}'; nothing to plot")
        return points
    for g in sorted(transitions, key=lambda g: g.id):
        xs, ys = evaluate(g.xi, x, y), evaluate(g.eta, x, y)
        points.extend(zip(xs.tolist(), ys.tolist()))
        logger.debug(f"Sampled {which} axis of {saddle} through {g.id}: {n_samples} points")
    return points


def write_polyline_csv(points: list[tuple[float, float]], path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y"])
        writer.writerows((repr(x), repr(y)) for x, y in points)
