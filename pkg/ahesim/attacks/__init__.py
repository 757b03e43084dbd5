from .report import (AttackKind, AttackReport, CreatorSummary,
                     detection_metrics, creator_summary)
from .scan import scan_scores
from .pattern import (craft_pattern_query, ThresholdPolicy, FixedThreshold,
                      MidpointThreshold, two_means_midpoint, flag_targets,
                      pattern_inference_attack)
from .creator import (creator_attribution_attack, attribution_accuracy,
                      run_attribution_trials, INCONCLUSIVE_Z)
