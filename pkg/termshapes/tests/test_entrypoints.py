import importlib
import io
import json
import sys
from unittest import mock

from django.test import SimpleTestCase


class ConfigPackageTests(SimpleTestCase):
    def test_imports_without_database_drivers(self):
        import config

        # None en sys.modules hace fallar cualquier import de esos drivers
        with mock.patch.dict(sys.modules, {"pymysql": None, "MySQLdb": None}):
            importlib.reload(config)
            importlib.import_module("config.settings")


class ManageTests(SimpleTestCase):
    def test_subcommand_goes_to_dispatch(self):
        import manage

        out = io.StringIO()
        argv = ["manage.py", "classify", "--beta=0,0,1,0", "--tau1", "1"]
        with mock.patch.object(sys, "argv", argv), mock.patch.object(sys, "stdout", out):
            with self.assertRaises(SystemExit) as ctx:
                manage.main()
        self.assertEqual(ctx.exception.code, 0)
        self.assertEqual(json.loads(out.getvalue())["shape"], "h")

    def test_domain_error_exit_code(self):
        import manage

        argv = ["manage.py", "classify", "--tau1", "1", "--tau2", "1", "--beta=0,0,1,1"]
        with mock.patch.object(sys, "argv", argv), mock.patch.object(sys, "stderr", io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                manage.main()
        self.assertEqual(ctx.exception.code, 1)

    def test_other_commands_go_to_django(self):
        import manage

        argv = ["manage.py", "check"]
        with mock.patch.object(sys, "argv", argv), mock.patch(
            "django.core.management.execute_from_command_line"
        ) as execute:
            manage.main()
        execute.assert_called_once_with(argv)
