"""
Entry point returning a process exit code instead of exiting.
"""
import os
import sys

import django
from django.apps import apps
from django.core.management import get_commands, load_command_class

COMMAND = 'run_experiment'


def cli_main(argv=None) -> int:
    """
    Run the run_experiment command with argv (without the program name).

    Returns:
        0 on success, 2 on a configuration or usage error, 3 on unreliable results.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    if not apps.ready:
        django.setup()

    command = load_command_class(get_commands()[COMMAND], COMMAND)
    try:
        command.run_from_argv(['manage.py', COMMAND, *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(cli_main())
