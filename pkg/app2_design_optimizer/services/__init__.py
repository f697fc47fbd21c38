# Design Optimizer Services
from .barrier_service import BarrierTerm, NewtonBarrierSolver
from .finite_difference import central_gradient, central_hessian, richardson_ratio
from .grid_service import grid_search, grid_feasible
from .report_service import write_text_report, write_constraint_csv, write_trace_csv, render_text_report
