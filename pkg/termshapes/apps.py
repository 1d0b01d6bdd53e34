from django.apps import AppConfig

class TermShapesConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "termshapes"
    verbose_name = "Formas de curvas de tasas"
