"""Configura Django para ejecutar la suite con pytest (igual que manage.py)."""
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
django.setup()
