"""
Root conftest: expose the shared fixtures in tests/conftest.py to the
per-app test packages under apps/.
"""
from tests.conftest import *  # noqa: F401,F403
