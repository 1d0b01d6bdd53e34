from typing import Any

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    "SCAN_POINTS": 10000,
    "ENVELOPE_SAMPLES": 4096,
    "THREADS": 1,
    "SEED": 0,
    "INGEST_PROFILE": "default",
    "INGEST_PROFILES": {
        "default": {
            "delimiter": ",",
            "date_format": "%Y-%m-%d",
            "skiprows": 0,
            "columns": {
                "date": "date",
                "beta0": "beta0",
                "beta1": "beta1",
                "beta2": "beta2",
                "beta3": "beta3",
                "tau1": "tau1",
                "tau2": "tau2",
            },
        },
    },
}


def get_setting(name: str) -> Any:
    """
    Lee settings.TERMSHAPES[name] con los valores por defecto de DEFAULTS.
    Funciona también sin settings configurados (uso como biblioteca).
    """
    try:
        user = getattr(settings, "TERMSHAPES", {}) or {}
    except ImproperlyConfigured:
        user = {}
    if name in user:
        return user[name]
    return DEFAULTS[name]
