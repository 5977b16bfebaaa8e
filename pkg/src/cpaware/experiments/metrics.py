"""Evaluation: confusion matrices, per-class and per-scale tables.

Per-intent precision and recall come from the 3x3 intent confusion
matrix.  Grading quality is summarized per severity scale (0-7) with

* recall(s):   correct assessments among samples whose true scale is s,
* accuracy(s): correct assessments among samples whose true *or*
  predicted scale is s (so false positives into s count against it),

and scales without support are flagged ``n/a`` rather than reported as
zero.  Classes without support likewise carry NaN precision/recall.

``evaluate_multitask`` and ``evaluate_sequential`` also return one raw
prediction row per sample, so every reported number can be recomputed
from the dump alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..assessment import (
    AssessmentThresholds,
    DEFAULT_THRESHOLDS,
    N_SCALES,
    assess,
    assess_with_intent,
)
from ..baseline import SequentialAssessor
from ..net.losses import focal_loss, mse_loss
from ..net.model import MultitaskNet
from ..threats import ThreatKind
from .training import one_hot_labels

INTENT_ORDER = tuple(k.name.lower() for k in ThreatKind)

ROW_FIELDS = ("sample_id", "true_intent", "pred_intent", "true_log_ber",
              "pred_log_ber", "true_scale", "pred_scale",
              "p_deceptive", "p_disruptive", "p_non_adversarial", "gated")


@dataclass
class MetricsReport:
    mode: str
    intent_confusion: np.ndarray
    intent_precision: np.ndarray
    intent_recall: np.ndarray
    intent_accuracy: float
    scale_confusion: np.ndarray
    assessment_accuracy: float
    per_scale: list[dict]
    loss_cls: float
    loss_reg: float
    loss_cls_per_class: np.ndarray
    loss_reg_per_class: np.ndarray
    theta: float | None = None
    extra: dict = field(default_factory=dict)

    def summary_lines(self) -> list[str]:
        label = self.mode if self.theta is None else f"{self.mode} (theta={self.theta:g})"
        lines = [f"[{label}] intent accuracy {self.intent_accuracy:.4f}, "
                 f"assessment accuracy {self.assessment_accuracy:.4f}, "
                 f"loss_cls {self.loss_cls:.4g}, loss_reg {self.loss_reg:.4g}"]
        for i, name in enumerate(INTENT_ORDER):
            lines.append(
                f"  {name:<16} precision {_fmt(self.intent_precision[i])}"
                f"  recall {_fmt(self.intent_recall[i])}"
            )
        for row in self.per_scale:
            lines.append(
                f"  scale {row['scale']}: support {row['support']:>4}  "
                f"recall {_fmt(row['recall'])}  accuracy {_fmt(row['accuracy'])}"
            )
        return lines


def _fmt(value) -> str:
    return "n/a" if value is None or (isinstance(value, float) and np.isnan(value)) \
        else f"{value:.4f}"


def confusion_matrix(true_idx: np.ndarray, pred_idx: np.ndarray,
                     n_classes: int) -> np.ndarray:
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(true_idx, pred_idx):
        matrix[int(t), int(p)] += 1
    return matrix


def precision_recall(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class precision and recall; NaN where the denominator is zero."""
    tp = np.diag(confusion).astype(float)
    predicted = confusion.sum(axis=0).astype(float)
    support = confusion.sum(axis=1).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, np.nan)
        recall = np.where(support > 0, tp / support, np.nan)
    return precision, recall


def per_scale_table(true_scales: np.ndarray, pred_scales: np.ndarray) -> list[dict]:
    """Recall and local accuracy per severity scale; see module docstring."""
    rows = []
    for scale in range(N_SCALES):
        true_here = true_scales == scale
        pred_here = pred_scales == scale
        support = int(true_here.sum())
        tp = int((true_here & pred_here).sum())
        involved = int((true_here | pred_here).sum())
        rows.append({
            "scale": scale,
            "support": support,
            "recall": (tp / support) if support else None,
            "accuracy": (tp / involved) if involved else None,
        })
    return rows


def true_scales_from_labels(intent_idx: np.ndarray, log_ber: np.ndarray,
                            thresholds: AssessmentThresholds = DEFAULT_THRESHOLDS
                            ) -> np.ndarray:
    """Ground-truth severity grades implied by the dataset labels."""
    return np.array([
        assess_with_intent(ThreatKind(int(i)), float(rho), thresholds).scale
        for i, rho in zip(intent_idx, log_ber)
    ])


def _per_class_losses(intent_idx, one_hot, probs, log_ber, rho_hat, gamma):
    cls = np.full(3, np.nan)
    reg = np.full(3, np.nan)
    for k in range(3):
        mask = intent_idx == k
        if mask.any():
            cls[k] = focal_loss(one_hot[mask], probs[mask], gamma)
            reg[k] = mse_loss(log_ber[mask], rho_hat[mask])[0]
    return cls, reg


def _build_report(mode, intent_idx, pred_idx, true_scales, pred_scales,
                  losses, theta=None, extra=None) -> MetricsReport:
    intent_conf = confusion_matrix(intent_idx, pred_idx, 3)
    precision, recall = precision_recall(intent_conf)
    scale_conf = confusion_matrix(true_scales, pred_scales, N_SCALES)
    return MetricsReport(
        mode=mode,
        intent_confusion=intent_conf,
        intent_precision=precision,
        intent_recall=recall,
        intent_accuracy=float(np.mean(pred_idx == intent_idx)),
        scale_confusion=scale_conf,
        assessment_accuracy=float(np.mean(pred_scales == true_scales)),
        per_scale=per_scale_table(true_scales, pred_scales),
        loss_cls=losses[0],
        loss_reg=losses[1],
        loss_cls_per_class=losses[2],
        loss_reg_per_class=losses[3],
        theta=theta,
        extra=extra or {},
    )


def evaluate_multitask(model: MultitaskNet, tensors: np.ndarray,
                       intent_idx: np.ndarray, log_ber: np.ndarray,
                       thresholds: AssessmentThresholds = DEFAULT_THRESHOLDS,
                       ) -> tuple[MetricsReport, list[dict]]:
    probs, rho_hat = model.predict_batched(tensors)
    one_hot = one_hot_labels(intent_idx)
    assessments = [assess(p, float(r), thresholds) for p, r in zip(probs, rho_hat)]
    pred_idx = np.array([a.kind.value for a in assessments])
    pred_scales = np.array([a.scale for a in assessments])
    true_scales = true_scales_from_labels(intent_idx, log_ber, thresholds)

    loss_cls = focal_loss(one_hot, probs, model.config.focal_gamma)
    loss_reg = mse_loss(log_ber, rho_hat)[0]
    per_cls, per_reg = _per_class_losses(intent_idx, one_hot, probs, log_ber,
                                         rho_hat, model.config.focal_gamma)
    report = _build_report("multitask", intent_idx, pred_idx, true_scales,
                           pred_scales, (loss_cls, loss_reg, per_cls, per_reg))
    rows = _make_rows(intent_idx, log_ber, pred_idx, rho_hat, true_scales,
                      pred_scales, probs=probs)
    return report, rows


def evaluate_sequential(assessor: SequentialAssessor, tensors: np.ndarray,
                        intent_idx: np.ndarray, log_ber: np.ndarray,
                        ) -> tuple[MetricsReport, list[dict]]:
    assessor.reset_counters()
    assessments, gated = assessor.assess_batch(tensors)
    pred_idx = np.array([a.kind.value for a in assessments])
    pred_scales = np.array([a.scale for a in assessments])
    rho_hat = np.array([a.log_ber_pred for a in assessments])
    true_scales = true_scales_from_labels(intent_idx, log_ber, assessor.thresholds)

    one_hot = one_hot_labels(intent_idx)
    cls_probs, _ = assessor.classifier.predict_batched(tensors)
    loss_cls = focal_loss(one_hot, cls_probs, assessor.classifier.config.focal_gamma)
    loss_reg = mse_loss(log_ber, rho_hat)[0]
    per_cls, per_reg = _per_class_losses(
        intent_idx, one_hot, cls_probs, log_ber, rho_hat,
        assessor.classifier.config.focal_gamma,
    )
    report = _build_report(
        "sequential", intent_idx, pred_idx, true_scales, pred_scales,
        (loss_cls, loss_reg, per_cls, per_reg), theta=assessor.threshold_ber,
        extra={"classifier_invocations": assessor.classifier_invocations,
               "gated_count": assessor.gated_count},
    )
    rows = _make_rows(intent_idx, log_ber, pred_idx, rho_hat, true_scales,
                      pred_scales, gated=gated)
    return report, rows


def _make_rows(intent_idx, log_ber, pred_idx, rho_hat, true_scales, pred_scales,
               probs=None, gated=None) -> list[dict]:
    rows = []
    for i in range(len(intent_idx)):
        row = {
            "sample_id": i,
            "true_intent": int(intent_idx[i]),
            "pred_intent": int(pred_idx[i]),
            "true_log_ber": float(log_ber[i]),
            "pred_log_ber": float(rho_hat[i]),
            "true_scale": int(true_scales[i]),
            "pred_scale": int(pred_scales[i]),
            "p_deceptive": float(probs[i][0]) if probs is not None else "",
            "p_disruptive": float(probs[i][1]) if probs is not None else "",
            "p_non_adversarial": float(probs[i][2]) if probs is not None else "",
            "gated": int(gated[i]) if gated is not None else 0,
        }
        rows.append(row)
    return rows


def write_rows_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def report_from_rows(rows: list[dict]) -> dict:
    """Recompute the headline metrics from a raw prediction dump."""
    true_idx = np.array([int(r["true_intent"]) for r in rows])
    pred_idx = np.array([int(r["pred_intent"]) for r in rows])
    true_scales = np.array([int(r["true_scale"]) for r in rows])
    pred_scales = np.array([int(r["pred_scale"]) for r in rows])
    conf = confusion_matrix(true_idx, pred_idx, 3)
    precision, recall = precision_recall(conf)
    return {
        "intent_confusion": conf,
        "intent_precision": precision,
        "intent_recall": recall,
        "intent_accuracy": float(np.mean(true_idx == pred_idx)),
        "assessment_accuracy": float(np.mean(true_scales == pred_scales)),
        "per_scale": per_scale_table(true_scales, pred_scales),
    }
