from .csoa import csoa_step, dual_update
from .fw_csoa import fw_csoa_step, tracked_gradient
from .loop import ALGORITHMS, CountingSet, RunResult, default_stride, run
from .schedules import (ManualSchedule, ScheduleT1, ScheduleT2, ScheduleWarning, gap_lower_bound,
                        lower_bound_q, schedule_theorem1, schedule_theorem2)

__all__ = [
    "ALGORITHMS", "CountingSet", "ManualSchedule", "RunResult", "ScheduleT1", "ScheduleT2",
    "ScheduleWarning", "csoa_step", "default_stride", "dual_update", "fw_csoa_step",
    "gap_lower_bound", "lower_bound_q", "run", "schedule_theorem1", "schedule_theorem2",
    "tracked_gradient",
]
