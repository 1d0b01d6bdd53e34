from pathlib import Path
import os
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")

SECRET_KEY = os.getenv("SECRET_KEY", "dev-inseguro")
DEBUG = os.getenv("DEBUG", "False").lower() == "true"

INSTALLED_APPS = [
    "termshapes.apps.TermShapesConfig",
]

# Sin persistencia: la app solo expone comandos de gestión.
DATABASES = {}

LANGUAGE_CODE = "es-cl"
TIME_ZONE = "America/Santiago"
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Los documentos de datos van a stdout / --out; todo lo demás a stderr.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "[%(levelname)s %(name)s:%(lineno)d] %(message)s"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "simple",
        },
    },
    "loggers": {
        "termshapes": {
            "handlers": ["console"],
            "level": os.getenv("TERMSHAPES_LOG_LEVEL", "WARNING").upper(),
            "propagate": False,
        },
    },
}

TERMSHAPES = {
    "SCAN_POINTS": int(os.getenv("TERMSHAPES_SCAN_POINTS", "10000")),
    "ENVELOPE_SAMPLES": int(os.getenv("TERMSHAPES_ENVELOPE_SAMPLES", "4096")),
    "THREADS": int(os.getenv("TERMSHAPES_THREADS", "1")),
    "SEED": int(os.getenv("TERMSHAPES_SEED", "0")),
    "INGEST_PROFILE": os.getenv("TERMSHAPES_INGEST_PROFILE", "default"),
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
        # Exportación de parámetros del BCE (SDW), una fila por fecha.
        "ecb": {
            "delimiter": ",",
            "date_format": "%Y-%m-%d",
            "skiprows": 0,
            "columns": {
                "date": "TIME_PERIOD",
                "beta0": "BETA0",
                "beta1": "BETA1",
                "beta2": "BETA2",
                "beta3": "BETA3",
                "tau1": "TAU1",
                "tau2": "TAU2",
            },
        },
        # feds200628.csv de la Reserva Federal (9 filas de preámbulo).
        "gsw": {
            "delimiter": ",",
            "date_format": "%Y-%m-%d",
            "skiprows": 9,
            # antes de 1980 no hay BETA3/TAU2: esas filas se leen como Nelson-Siegel
            "missing_beta3_as_ns": True,
            "na_values": ["NA", "-999.99"],
            "columns": {
                "date": "Date",
                "beta0": "BETA0",
                "beta1": "BETA1",
                "beta2": "BETA2",
                "beta3": "BETA3",
                "tau1": "TAU1",
                "tau2": "TAU2",
            },
        },
    },
}
