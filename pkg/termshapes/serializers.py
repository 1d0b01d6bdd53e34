"""
DTOs de los documentos que emiten los comandos. Cada uno se arma con un
`from_...` y se vuelca con `to_dict()`; el formato de salida lo decide
utils/output.py.
"""
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

from termshapes.dynamics import Horizons, ShapeDistribution
from termshapes.envelope import EnvelopeCurve, LineCoeffs
from termshapes.ingest import FrequencyReport, ParamSeries
from termshapes.segmentation import SegmentRecord
from termshapes.shape_oracle import Shape
from termshapes.term_structure import CurveParams


def _num(value) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _line(line: Optional[LineCoeffs]) -> Optional[dict]:
    if line is None:
        return None
    return {"a": _num(line.a), "b": _num(line.b), "c": _num(line.c)}


def _point(pt) -> Optional[List[float]]:
    if pt is None:
        return None
    return [_num(pt[0]), _num(pt[1])]


@dataclass
class ExtremumDTO:
    x: float
    kind: str


@dataclass
class ShapeDTO:
    curve: str
    family: str
    shape: str
    extrema: List[ExtremumDTO]
    boundary: bool
    winding: Optional[int] = None
    in_D: Optional[bool] = None

    @staticmethod
    def from_shape(kind: str, params: CurveParams, shape: Shape) -> "ShapeDTO":
        return ShapeDTO(
            curve=str(kind),
            family=str(params.family),
            shape=shape.tag,
            extrema=[ExtremumDTO(x=_num(e.x), kind=e.kind) for e in shape.extrema],
            boundary=bool(shape.boundary),
        )

    @staticmethod
    def from_record(kind: str, params: CurveParams, record: SegmentRecord) -> "ShapeDTO":
        return ShapeDTO(
            curve=str(kind),
            family=str(params.family),
            shape=record.shape,
            extrema=[],
            boundary=record.boundary_flag,
            winding=record.winding,
            in_D=record.in_D,
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.winding is None:
            data.pop("winding")
            data.pop("in_D")
        return data


@dataclass
class GridDTO:
    curve: str
    tau1: float
    tau2: Optional[float]
    beta3_sign: str
    grid: dict
    records: List[dict]

    @staticmethod
    def from_records(kind: str, params: CurveParams, grid, records: List[SegmentRecord]) -> "GridDTO":
        sign = "zero" if params.beta3 == 0 else ("positive" if params.beta3 > 0 else "negative")
        return GridDTO(
            curve=str(kind),
            tau1=params.tau1,
            tau2=params.tau2,
            beta3_sign=sign,
            grid={"x0": grid.x0, "x1": grid.x1, "y0": grid.y0, "y1": grid.y1, "nx": grid.nx, "ny": grid.ny},
            records=[asdict(r) for r in records],
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EnvelopeDTO:
    curve: str
    tau1: float
    tau2: float
    horizon: Optional[float]
    points: List[dict]
    cusp: Optional[dict]
    line0: dict
    contact0: List[float]
    line_inf: Optional[dict]
    contact_inf: Optional[List[float]]
    M: Optional[List[float]]
    line_T: Optional[dict]
    contact_T: Optional[List[float]]

    @staticmethod
    def from_curve(params: CurveParams, curve: EnvelopeCurve) -> "EnvelopeDTO":
        cusp = None
        if curve.cusp is not None:
            x, pt = curve.cusp
            cusp = {"x": _num(x), "gamma1": _num(pt[0]), "gamma2": _num(pt[1])}
        return EnvelopeDTO(
            curve=str(curve.kind),
            tau1=params.tau1,
            tau2=params.tau2,
            horizon=_num(curve.horizon),
            points=[
                {"x": _num(x), "gamma1": _num(p[0]), "gamma2": _num(p[1]), "segment": f"envelope_{piece}"}
                for x, p, piece in zip(curve.xs, curve.points, curve.pieces())
            ],
            cusp=cusp,
            line0=_line(curve.line0),
            contact0=_point(curve.contact0),
            line_inf=_line(curve.line_inf),
            contact_inf=_point(curve.contact_inf),
            M=_point(curve.M),
            line_T=_line(curve.line_T),
            contact_T=_point(curve.contact_T),
        )

    def csv_rows(self) -> List[dict]:
        """
        Muestras con su tramo, luego las marcas: cúspide, cada recta de borde
        (coeficientes a, b, c) en su punto de contacto, y M.
        """
        rows = [dict(p, a=None, b=None, c=None) for p in self.points]
        if self.cusp is not None:
            rows.append(dict(self.cusp, segment="cusp", a=None, b=None, c=None))
        marks = (
            ("line0", 0.0, self.line0, self.contact0),
            ("line_inf", None, self.line_inf, self.contact_inf),
            ("line_T", self.horizon, self.line_T, self.contact_T),
        )
        for name, x, line, contact in marks:
            if line is None:
                continue
            g1, g2 = contact if contact is not None else (None, None)
            rows.append({"x": x, "gamma1": g1, "gamma2": g2, "segment": name, **line})
        if self.M is not None:
            rows.append({"x": None, "gamma1": self.M[0], "gamma2": self.M[1], "segment": "M", "a": None, "b": None, "c": None})
        return rows

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AttainableDTO:
    family: Optional[str]
    r: Optional[float]
    beta3_sign: Optional[str]
    shapes: List[str]
    curve: Optional[str] = None
    t: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class HorizonsDTO:
    beta2: float
    beta3: float
    tau1: float
    t_dagger_f: Optional[float]
    t_star_f: Optional[float]
    t_dagger_y: Optional[float]
    t_star_star_y: Optional[float]
    t_star_y: Optional[float]
    branch: str
    flag: bool
    long_run_shape: Optional[str]

    @staticmethod
    def from_horizons(init, horizons: Horizons, long_run: Optional[str]) -> "HorizonsDTO":
        return HorizonsDTO(
            beta2=init.beta2,
            beta3=init.beta3,
            tau1=init.tau1,
            t_dagger_f=_num(horizons.t_dagger_f),
            t_star_f=_num(horizons.t_star_f),
            t_dagger_y=_num(horizons.t_dagger_y),
            t_star_star_y=_num(horizons.t_star_star_y),
            t_star_y=_num(horizons.t_star_y),
            branch=horizons.branch,
            flag=horizons.flag,
            long_run_shape=long_run,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DistributionDTO:
    t: float
    curve: str
    mu: float
    sigma2: float
    gamma1: float
    probs: Dict[str, float]
    n: Optional[int] = None
    seed: Optional[int] = None
    counts: Optional[Dict[str, int]] = None
    analytic: Optional[Dict[str, float]] = None

    @staticmethod
    def from_distribution(
        dist: ShapeDistribution,
        mu: float,
        sigma2: float,
        gamma1: float,
        seed: Optional[int] = None,
        analytic: Optional[ShapeDistribution] = None,
    ) -> "DistributionDTO":
        return DistributionDTO(
            t=dist.t,
            curve=dist.kind,
            mu=_num(mu),
            sigma2=_num(sigma2),
            gamma1=_num(gamma1),
            probs={k: float(v) for k, v in sorted(dist.probs.items())},
            n=dist.n,
            seed=seed,
            counts={k: int(v) for k, v in dist.counts.items()} if dist.n is not None else None,
            analytic={k: float(v) for k, v in sorted(analytic.probs.items())} if analytic else None,
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.n is None:
            for key in ("n", "seed", "counts", "analytic"):
                data.pop(key)
        return data


@dataclass
class ReportDTO:
    curve: str
    rows: int
    quarantined: int
    regimes: Dict[str, dict]
    shapes: Dict[str, dict]
    quarantine: List[dict]
    series: List[dict]

    @staticmethod
    def from_report(report: FrequencyReport, series: ParamSeries) -> "ReportDTO":
        return ReportDTO(
            curve=report.kind,
            rows=report.rows,
            quarantined=report.quarantined,
            regimes=report.regimes,
            shapes=report.shapes,
            quarantine=[{"line": q.line, "reason": q.reason} for q in series.quarantine],
            series=[asdict(p) for p in report.series],
        )

    def to_dict(self) -> dict:
        return asdict(self)
