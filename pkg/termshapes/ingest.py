"""
Lectura de series de parámetros Svensson publicadas (BCE, Reserva Federal)
y reporte de frecuencias de regímenes y formas.

Las filas inválidas se ponen en cuarentena con su motivo; nunca se descartan
en silencio.
"""
from __future__ import annotations

import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

import pandas as pd

from .choices import RegimeTag
from .conf import get_setting
from .exceptions import ArgumentError, InputReadError, ParameterError, SchemaError
from .segmentation import classify_ns
from .shape_oracle import classify_direct
from .term_structure import CurveParams, regime_of
from .utils.parallel import ordered_map

logger = logging.getLogger(__name__)

FIELDS = ("date", "beta0", "beta1", "beta2", "beta3", "tau1", "tau2")
NS_CELL = "NS"

Source = Union[str, Path, TextIO]


# === TIPOS ===

@dataclass(frozen=True)
class ParamRow:
    date: date
    params: CurveParams


@dataclass
class QuarantinedRow:
    line: int
    raw: Dict[str, str]
    reason: str


@dataclass
class ParamSeries:
    rows: List[ParamRow] = field(default_factory=list)
    quarantine: List[QuarantinedRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class SeriesPoint:
    date: str
    r: Optional[float]
    beta3_sign: str
    regime: str
    shape: str


@dataclass
class FrequencyReport:
    kind: str
    rows: int
    quarantined: int
    regimes: Dict[str, Dict[str, float]]
    shapes: Dict[str, Dict[str, float]]
    series: List[SeriesPoint]


# === PERFILES ===

def load_profile(name: str = None) -> dict:
    name = name or get_setting("INGEST_PROFILE")
    profiles = get_setting("INGEST_PROFILES")
    if name not in profiles:
        raise ArgumentError(f"unknown ingest profile {name!r}; known: {', '.join(sorted(profiles))}")
    profile = dict(profiles[name])
    profile.setdefault("delimiter", ",")
    profile.setdefault("date_format", "%Y-%m-%d")
    profile.setdefault("skiprows", 0)
    profile.setdefault("na_values", [])
    profile.setdefault("missing_beta3_as_ns", False)
    missing = [f for f in FIELDS if f not in profile.get("columns", {})]
    if missing:
        raise ArgumentError(f"ingest profile {name!r} lacks columns for: {', '.join(missing)}")
    return profile


# === LECTURA ===

def _read_frame(source: Source, profile: dict) -> pd.DataFrame:
    try:
        return pd.read_csv(
            source,
            sep=profile["delimiter"],
            skiprows=profile["skiprows"],
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except (OSError, UnicodeDecodeError) as exc:
        raise InputReadError(f"cannot read {source!r}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaError("input has no header row") from exc
    except pd.errors.ParserError as exc:
        raise SchemaError(f"malformed delimited text: {exc}") from exc


def _parse_number(text: str, name: str, na_values) -> Optional[float]:
    text = (text or "").strip()
    if text == "" or text in na_values:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParameterError(f"{name} is not a number: {text!r}")
    return value


def _parse_row(raw: Dict[str, str], profile: dict) -> ParamRow:
    cols = profile["columns"]
    na_values = set(profile["na_values"])
    text = (raw[cols["date"]] or "").strip()
    try:
        day = datetime.strptime(text, profile["date_format"]).date()
    except ValueError:
        raise ParameterError(f"invalid date {text!r}")

    values = {name: _parse_number(raw[cols[name]], name, na_values) for name in FIELDS[1:]}
    if profile["missing_beta3_as_ns"] and values["beta3"] is None and values["tau2"] is None:
        values["beta3"] = 0.0
    for name in ("beta0", "beta1", "beta2", "beta3", "tau1"):
        if values[name] is None:
            raise ParameterError(f"{name} is missing")
    return ParamRow(date=day, params=CurveParams(**values))


def parse_series(source: Source, profile: Union[str, dict] = None) -> ParamSeries:
    """
    Lee un texto delimitado con encabezado. Devuelve la serie validada,
    ordenada por fecha, y la cuarentena con el motivo de cada fila rechazada.
    """
    profile = load_profile(profile) if not isinstance(profile, dict) else profile
    frame = _read_frame(source, profile)
    frame.columns = [str(c).strip() for c in frame.columns]
    cols = profile["columns"]
    missing = [cols[f] for f in FIELDS if cols[f] not in frame.columns]
    if missing:
        raise SchemaError(f"missing mandatory column(s): {', '.join(missing)}")

    series = ParamSeries()
    first_line = int(profile["skiprows"]) + 2
    for offset, raw in enumerate(frame.to_dict(orient="records")):
        try:
            series.rows.append(_parse_row(raw, profile))
        except ParameterError as exc:
            line = first_line + offset
            logger.warning("fila %d en cuarentena: %s", line, exc)
            series.quarantine.append(QuarantinedRow(line=line, raw=raw, reason=str(exc)))

    series.rows.sort(key=lambda row: row.date)
    for prev, cur in zip(series.rows[:-1], series.rows[1:]):
        if prev.date == cur.date:
            raise SchemaError(f"duplicate date {cur.date.isoformat()}")
    logger.info("serie leída: %d filas válidas, %d en cuarentena", len(series.rows), len(series.quarantine))
    return series


def _format_number(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_series(series: ParamSeries, target: TextIO, profile: Union[str, dict] = None) -> None:
    """Escribe la serie con el layout del perfil (el preámbulo no se reproduce)."""
    profile = load_profile(profile) if not isinstance(profile, dict) else profile
    cols = profile["columns"]
    records = []
    for row in series.rows:
        p = row.params
        records.append({
            cols["date"]: row.date.strftime(profile["date_format"]),
            cols["beta0"]: _format_number(p.beta0),
            cols["beta1"]: _format_number(p.beta1),
            cols["beta2"]: _format_number(p.beta2),
            cols["beta3"]: _format_number(p.beta3),
            cols["tau1"]: _format_number(p.tau1),
            cols["tau2"]: _format_number(p.tau2),
        })
    frame = pd.DataFrame.from_records(records, columns=[cols[f] for f in FIELDS])
    frame.to_csv(target, sep=profile["delimiter"], index=False, lineterminator="\n")


def series_to_text(series: ParamSeries, profile: Union[str, dict] = None) -> str:
    buf = io.StringIO()
    write_series(series, buf, profile)
    return buf.getvalue()


# === REPORTE ===

def _classify_row(kind: str, row: ParamRow) -> SeriesPoint:
    p = row.params
    if p.beta3 == 0:
        shape = classify_ns(p.beta1, p.beta2, kind, p.tau1).tag
        return SeriesPoint(
            date=row.date.isoformat(), r=None, beta3_sign="zero", regime=NS_CELL, shape=shape,
        )
    regime = regime_of(p)
    return SeriesPoint(
        date=row.date.isoformat(),
        r=regime.r,
        beta3_sign="positive" if p.beta3 > 0 else "negative",
        regime=regime.tag.value,
        shape=classify_direct(kind, p).tag,
    )


def _table(counts: Counter, total: int) -> Dict[str, Dict[str, float]]:
    return {
        key: {"count": counts[key], "percent": round(100.0 * counts[key] / total, 1)}
        for key in sorted(counts)
    }


def regime_cell(point: SeriesPoint) -> str:
    if point.regime == NS_CELL:
        return NS_CELL
    return f"{point.regime}/{point.beta3_sign}"


def frequency_report(series: ParamSeries, kind: str, threads: int = 1) -> FrequencyReport:
    """
    Tablas de frecuencia por celda de régimen (separadas por signo de β3,
    más la celda NS) y por forma, con conteos y porcentajes redondeados a 0.1.
    """
    if not series.rows:
        raise ArgumentError("frequency report needs a non-empty series")
    points = ordered_map(lambda row: _classify_row(kind, row), series.rows, threads)
    total = len(points)
    regimes = _table(Counter(regime_cell(p) for p in points), total)
    # celdas vacías de la partición se informan con 0
    for tag in RegimeTag.values:
        for sign in ("positive", "negative"):
            regimes.setdefault(f"{tag}/{sign}", {"count": 0, "percent": 0.0})
    regimes = dict(sorted(regimes.items()))
    shapes = _table(Counter(p.shape for p in points), total)
    logger.info("reporte kind=%s filas=%d", kind, total)
    return FrequencyReport(
        kind=str(kind),
        rows=total,
        quarantined=len(series.quarantine),
        regimes=regimes,
        shapes=shapes,
        series=points,
    )


def series_frame(report: FrequencyReport) -> pd.DataFrame:
    """Serie temporal (date, r, beta3_sign, regime, shape) para exportar a CSV."""
    frame = pd.DataFrame(
        [[p.date, p.r, p.beta3_sign, p.regime, p.shape] for p in report.series],
        columns=["date", "r", "beta3_sign", "regime", "shape"],
    )
    frame["r"] = frame["r"].map(lambda v: "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v)))
    return frame
