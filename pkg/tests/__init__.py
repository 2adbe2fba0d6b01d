# This file is needed for the overrides in mypy.ini to work.
