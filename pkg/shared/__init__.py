# Shared module
from .config import *
from .errors import *
from .models import (
    LinkSet, KneeAngleBreakdown, JointLayout, RomPoint, DesignVector,
    BarrierParams, SolveReport, SensitivityScan, Frame, FrameSeries,
    MarkerSeries, AngleSeries, PairedSeries, ErrorSeries, AngleConvention,
    ProblemConfig, RunConfig,
)
