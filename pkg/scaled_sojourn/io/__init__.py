from .config import (apply_overrides, build_scenario, load_scenario, parse_scenario,
                     parse_settings, render_scenario)
from .reports import Report, emit_reports, lag_table, parse_reports, write_csv
from .units import Kind, parse_quantity, render_quantity
