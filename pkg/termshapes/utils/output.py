# termshapes/utils/output.py
import json
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO

import numpy as np
import pandas as pd
from django.core.serializers.json import DjangoJSONEncoder

from termshapes.choices import OutputFormat


def _clean(value):
    """numpy -> tipos nativos; NaN/inf -> None (JSON estricto)."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(doc: dict) -> str:
    return json.dumps(_clean(doc), cls=DjangoJSONEncoder, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return frame.to_csv(index=False, lineterminator="\n")


def emit(
    stdout: TextIO,
    doc: dict,
    fmt: str = OutputFormat.JSON,
    rows: Optional[List[dict]] = None,
    columns: Optional[Sequence[str]] = None,
    out: Optional[str] = None,
) -> None:
    """Escribe el documento en `out` o en stdout; nada más va al flujo de datos."""
    if fmt == OutputFormat.CSV:
        text = render_csv(rows if rows is not None else [doc], columns or list(doc.keys()))
    else:
        text = render_json(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
