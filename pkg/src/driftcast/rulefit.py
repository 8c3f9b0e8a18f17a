"""Rule-ensemble classifier: tree paths become rules, rules feed sparse
one-vs-rest logistic models, scores normalize to a per-predictor
probability vector.

The interpretability contract: every retained rule is a conjunction of
threshold conditions on named features, rendered deterministically
("variance <= 7.2 AND mean > 40"), with a support fraction and one
coefficient per predictor class.  A missing (NaN) feature value never
satisfies a conjunct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boosting import boost_trees, iter_paths
from .errors import DataError, TrainingError
from .optim import _sigmoid, fit_l1_logistic


@dataclass(frozen=True)
class Conjunct:
    feature: str
    op: str
    threshold: float

    def __post_init__(self) -> None:
        if self.op not in ("<=", ">"):
            raise DataError(f"invalid rule operator {self.op!r}")

    def render(self) -> str:
        return f"{self.feature} {self.op} {_render_number(self.threshold)}"

    def evaluate(self, value: float) -> bool:
        if not np.isfinite(value):
            return False
        return value <= self.threshold if self.op == "<=" else value > self.threshold


def _render_number(value: float) -> str:
    rounded = round(value, 4)
    return repr(rounded if rounded != int(rounded) else int(rounded))


@dataclass(frozen=True)
class Rule:
    """A conjunction of threshold conditions with per-class coefficients."""

    conjuncts: tuple[Conjunct, ...]
    support: float
    coefficients: dict[str, float]

    def render(self) -> str:
        return " AND ".join(c.render() for c in self.conjuncts)

    def evaluate_row(self, row: np.ndarray, column_index: dict[str, int]) -> bool:
        return all(c.evaluate(float(row[column_index[c.feature]])) for c in self.conjuncts)


@dataclass(frozen=True)
class ProbabilityVector:
    """Per-predictor weights in [0, 1] summing to 1."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.ids),):
            raise DataError("probability vector shape mismatch")
        if np.any(values < 0) or np.any(values > 1) or abs(float(values.sum()) - 1.0) > 1e-9:
            raise DataError("probabilities must lie in [0, 1] and sum to 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def weight(self, predictor_id: str) -> float:
        return float(self.values[self.ids.index(predictor_id)])


@dataclass(frozen=True)
class RuleFitConfig:
    # l1_c is the inverse penalty on the mean logistic loss; values below
    # ~10 shrink every rule to zero for minority classes.
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    subsample: float = 0.75
    l1_c: float = 50.0
    include_linear_terms: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1:
            raise DataError("n_trees and max_depth must be >= 1")
        if not (0.0 < self.learning_rate <= 1.0) or not (0.0 < self.subsample <= 1.0):
            raise DataError("learning_rate and subsample must be in (0, 1]")
        if self.l1_c <= 0:
            raise DataError("l1_c must be > 0")

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "subsample": self.subsample,
            "l1_c": self.l1_c,
            "include_linear_terms": self.include_linear_terms,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class LinearTerm:
    """Winsorized, standardized raw-feature term with per-class coefficients."""

    feature: str
    lower: float
    upper: float
    mean: float
    std: float
    coefficients: dict[str, float]

    def transform(self, value: float) -> float:
        if not np.isfinite(value):
            return 0.0
        return (min(max(value, self.lower), self.upper) - self.mean) / self.std


@dataclass(frozen=True)
class RuleModel:
    """Fitted rule ensemble mapping a feature row to class probabilities."""

    columns: tuple[str, ...]
    class_ids: tuple[str, ...]
    rules: tuple[Rule, ...]
    intercepts: dict[str, float]
    linear_terms: tuple[LinearTerm, ...]
    catalog_version: str
    intercept_only: bool
    config: RuleFitConfig = field(default_factory=RuleFitConfig)

    @property
    def column_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.columns)}

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "catalog_version": self.catalog_version,
            "columns": list(self.columns),
            "class_ids": list(self.class_ids),
            "intercepts": {k: float(v) for k, v in self.intercepts.items()},
            "intercept_only": self.intercept_only,
            "config": self.config.to_dict(),
            "rules": [
                {
                    "conjuncts": [
                        {"feature": c.feature, "op": c.op, "threshold": float(c.threshold)}
                        for c in rule.conjuncts
                    ],
                    "rendered": rule.render(),
                    "support": float(rule.support),
                    "coefficients": {k: float(v) for k, v in rule.coefficients.items()},
                }
                for rule in self.rules
            ],
            "linear_terms": [
                {
                    "feature": t.feature,
                    "lower": float(t.lower),
                    "upper": float(t.upper),
                    "mean": float(t.mean),
                    "std": float(t.std),
                    "coefficients": {k: float(v) for k, v in t.coefficients.items()},
                }
                for t in self.linear_terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "RuleModel":
        if payload.get("format_version") != 1:
            raise DataError("unsupported rule model format")
        rules = tuple(
            Rule(
                conjuncts=tuple(
                    Conjunct(c["feature"], c["op"], float(c["threshold"])) for c in entry["conjuncts"]
                ),
                support=float(entry["support"]),
                coefficients={k: float(v) for k, v in entry["coefficients"].items()},
            )
            for entry in payload["rules"]
        )
        terms = tuple(
            LinearTerm(
                feature=entry["feature"],
                lower=float(entry["lower"]),
                upper=float(entry["upper"]),
                mean=float(entry["mean"]),
                std=float(entry["std"]),
                coefficients={k: float(v) for k, v in entry["coefficients"].items()},
            )
            for entry in payload.get("linear_terms", [])
        )
        return cls(
            columns=tuple(payload["columns"]),
            class_ids=tuple(payload["class_ids"]),
            rules=rules,
            intercepts={k: float(v) for k, v in payload["intercepts"].items()},
            linear_terms=terms,
            catalog_version=payload["catalog_version"],
            intercept_only=bool(payload["intercept_only"]),
            config=RuleFitConfig(**payload["config"]),
        )


def _rule_design_column(X: np.ndarray, conjuncts: tuple[tuple[int, str, float], ...]) -> np.ndarray:
    mask = np.ones(X.shape[0], dtype=bool)
    for feature, op, threshold in conjuncts:
        column = X[:, feature]
        finite = np.isfinite(column)
        with np.errstate(invalid="ignore"):
            satisfied = column <= threshold if op == "<=" else column > threshold
        mask &= satisfied & finite
    return mask.astype(np.float64)


def fit_rule_model(table, config: RuleFitConfig = RuleFitConfig(), catalog_version: str = "") -> RuleModel:
    """Fit the rule ensemble on a training table.

    ``table`` provides ``columns`` (feature names), ``design`` (row-major
    matrix, NaN for missing), ``labels`` (best-predictor id per row), and
    ``pool_ids`` (ordered class ids).  Steps: per-class boosted shallow
    trees on one-vs-rest indicators, every depth >= 1 tree path becomes a
    candidate rule, rules deduplicate by conjunct set, then a sparse
    logistic model per class over the rule design matrix.
    """
    columns: tuple[str, ...] = tuple(table.columns)
    X = np.asarray(table.design, dtype=np.float64)
    labels = list(table.labels)
    class_ids: tuple[str, ...] = tuple(table.pool_ids)
    n = X.shape[0]
    if n < 10:
        raise TrainingError(f"rule model needs >= 10 rows, got {n}")
    if len(set(labels)) < 2:
        raise TrainingError("rule model needs >= 2 distinct labels")
    unknown = sorted(set(labels) - set(class_ids))
    if unknown:
        raise TrainingError(f"labels {unknown} missing from the class id list")

    rng = np.random.default_rng(config.seed)
    candidates: list[tuple[tuple[int, str, float], ...]] = []
    seen: set[frozenset] = set()
    for class_id in class_ids:
        indicator = np.array([1.0 if lab == class_id else 0.0 for lab in labels])
        trees = boost_trees(
            X,
            indicator,
            n_trees=config.n_trees,
            max_depth=config.max_depth,
            learning_rate=config.learning_rate,
            subsample=config.subsample,
            rng=rng,
        )
        for tree in trees:
            for path in iter_paths(tree):
                key = frozenset(path)
                if key not in seen:
                    seen.add(key)
                    candidates.append(tuple(path))

    design_columns: list[np.ndarray] = []
    kept: list[tuple[tuple[int, str, float], ...]] = []
    supports: list[float] = []
    for conjuncts in candidates:
        column = _rule_design_column(X, conjuncts)
        support = float(column.mean())
        if 0.0 < support < 1.0:
            design_columns.append(column)
            kept.append(conjuncts)
            supports.append(support)

    terms_spec: list[LinearTerm] = []
    linear_columns: list[np.ndarray] = []
    if config.include_linear_terms:
        for j, name in enumerate(columns):
            raw = X[:, j]
            finite = raw[np.isfinite(raw)]
            if finite.size < 2 or float(np.std(finite)) == 0.0:
                continue
            lower = float(np.quantile(finite, 0.025))
            upper = float(np.quantile(finite, 0.975))
            clipped = np.clip(np.where(np.isfinite(raw), raw, np.mean(finite)), lower, upper)
            std = float(np.std(clipped))
            if std == 0.0:
                continue
            mean = float(np.mean(clipped))
            terms_spec.append(LinearTerm(name, lower, upper, mean, std, {}))
            linear_columns.append((clipped - mean) / std)

    n_rules = len(design_columns)
    if n_rules + len(linear_columns) == 0:
        return _intercept_only_model(labels, class_ids, columns, catalog_version, config)

    design = np.column_stack(design_columns + linear_columns)
    coefficient_rows: dict[str, np.ndarray] = {}
    intercepts: dict[str, float] = {}
    for class_id in class_ids:
        indicator = np.array([1.0 if lab == class_id else 0.0 for lab in labels])
        fit = fit_l1_logistic(design, indicator, c=config.l1_c)
        coefficient_rows[class_id] = fit.weights
        intercepts[class_id] = float(fit.intercept)

    rules: list[Rule] = []
    for idx, conjuncts in enumerate(kept):
        coefs = {cid: float(coefficient_rows[cid][idx]) for cid in class_ids}
        if all(v == 0.0 for v in coefs.values()):
            continue
        rules.append(
            Rule(
                conjuncts=tuple(Conjunct(columns[f], op, thr) for f, op, thr in conjuncts),
                support=supports[idx],
                coefficients=coefs,
            )
        )

    linear_terms: list[LinearTerm] = []
    for offset, term in enumerate(terms_spec):
        coefs = {cid: float(coefficient_rows[cid][n_rules + offset]) for cid in class_ids}
        if all(v == 0.0 for v in coefs.values()):
            continue
        linear_terms.append(
            LinearTerm(term.feature, term.lower, term.upper, term.mean, term.std, coefs)
        )

    if not rules and not linear_terms:
        return _intercept_only_model(labels, class_ids, columns, catalog_version, config)
    return RuleModel(
        columns=columns,
        class_ids=class_ids,
        rules=tuple(rules),
        intercepts=intercepts,
        linear_terms=tuple(linear_terms),
        catalog_version=catalog_version,
        intercept_only=False,
        config=config,
    )


def _intercept_only_model(labels, class_ids, columns, catalog_version, config) -> RuleModel:
    n = len(labels)
    intercepts: dict[str, float] = {}
    for class_id in class_ids:
        rate = sum(1 for lab in labels if lab == class_id) / n
        rate = min(max(rate, 1e-9), 1 - 1e-9)
        intercepts[class_id] = float(np.log(rate / (1 - rate)))
    return RuleModel(
        columns=tuple(columns),
        class_ids=tuple(class_ids),
        rules=(),
        intercepts=intercepts,
        linear_terms=(),
        catalog_version=catalog_version,
        intercept_only=True,
        config=config,
    )


def predict_proba(model: RuleModel, row: np.ndarray, columns: tuple[str, ...] | None = None) -> ProbabilityVector:
    """Per-class logistic scores, normalized to sum to one.

    ``columns``, when given, must match the model's training columns; the
    row is expected in that order.  Missing values never satisfy a rule
    conjunct and contribute zero to linear terms.
    """
    if columns is not None and tuple(columns) != model.columns:
        raise DataError("feature columns do not match the fitted model")
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (len(model.columns),):
        raise DataError(f"expected a row of {len(model.columns)} features")
    index = model.column_index
    scores = np.empty(len(model.class_ids))
    active = [rule for rule in model.rules if rule.evaluate_row(row, index)]
    for k, class_id in enumerate(model.class_ids):
        z = model.intercepts[class_id]
        for rule in active:
            z += rule.coefficients[class_id]
        for term in model.linear_terms:
            z += term.coefficients[class_id] * term.transform(float(row[index[term.feature]]))
        scores[k] = z
    sigma = _sigmoid(scores)
    return ProbabilityVector(ids=model.class_ids, values=sigma / sigma.sum())


def explain(model: RuleModel, top_k: int | None = None, order: str = "support") -> list[dict]:
    """Deterministic rule listing; ties broken by rendered rule string."""
    if order not in ("support", "coefficient-magnitude"):
        raise DataError(f"unknown ordering {order!r}")
    entries = [
        {
            "rule": rule.render(),
            "support": float(rule.support),
            "coefficients": {k: float(v) for k, v in rule.coefficients.items()},
        }
        for rule in model.rules
    ]
    if order == "support":
        entries.sort(key=lambda e: (-e["support"], e["rule"]))
    else:
        entries.sort(key=lambda e: (-max(abs(v) for v in e["coefficients"].values()), e["rule"]))
    return entries[:top_k] if top_k is not None else entries


def render_explanation(entries: list[dict]) -> str:
    lines = []
    for i, entry in enumerate(entries, start=1):
        coefs = ", ".join(f"{k}={v:+.4f}" for k, v in sorted(entry["coefficients"].items()))
        lines.append(f"{i}. [support={entry['support']:.3f}] {entry['rule']}  ({coefs})")
    return "\n".join(lines)


def save_rules(model: RuleModel, path: str | Path) -> None:
    Path(path).write_text(model.to_json() + "\n", encoding="utf-8")


def load_rules(path: str | Path) -> RuleModel:
    return RuleModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
