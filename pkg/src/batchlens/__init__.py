"""Complexity-guided mini-batch selection for image inpainting training."""

from .imaging import (GrayPlane, ImageTensor, MaskGrid, bilinear_resize,
                      irregular_mask, load_image, load_report, read_manifest,
                      regular_mask, save_report, to_grayscale)
from .complexity import (ComplexityProfile, combine, glcm, glcm_entropy,
                         normalize_values, raw_metrics, score_profiles,
                         sobel_magnitude, spatial_information, total_variation,
                         validate_weights)
from .calibration import NOISE, CalibrationResult, dbscan_1d, estimate_pivot
from .selection import (METHODS, SelectionDecision, SelectorConfig,
                        draw_subset, empirical_cdf, proposed_scores,
                        run_selection_round, score_proposed, select_jiang,
                        select_topk)
from .harness import (InpaintingDataset, ToyInpainter, TrainRecord,
                      TrainResult, TrainingDiverged, build_masks,
                      correlation_study, masked_l1_loss, pearson,
                      sweep_ratio, synthetic_dataset, timing_study, train)
from .quality import QualityReport, psnr, quality_report, ssim

__version__ = "0.1.0"
