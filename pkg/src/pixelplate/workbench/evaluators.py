"""Named evaluator registry for the CLI and run_design.

Maps evaluator names to constructors over their backing resources: the oracle
needs nothing, the surrogate needs a PXSM weight file, and the lookup table
needs a dataset of already-labeled genomes.
"""

from __future__ import annotations

from ..bpso import Evaluator, LookupTableEvaluator, OracleEvaluator, SurrogateEvaluator
from ..errors import EvaluatorError
from ..sparams import ResonancePoint
from ..surrogate import load_model
from .dataset import load_dataset

KNOWN_EVALUATORS = ("oracle", "surrogate", "lookup")


def build_evaluator(name: str, model_path=None, table_path=None) -> Evaluator:
    if name == "oracle":
        return OracleEvaluator()
    if name == "surrogate":
        if model_path is None:
            raise EvaluatorError("the surrogate evaluator needs a weight file (--model)")
        model, normalizer = load_model(model_path)
        return SurrogateEvaluator(model, normalizer)
    if name == "lookup":
        if table_path is None:
            raise EvaluatorError("the lookup evaluator needs a labeled dataset")
        ds = load_dataset(table_path)
        table = {s.genome_hex: ResonancePoint(s.f_res_ghz, s.s21_db) for s in ds.samples}
        return LookupTableEvaluator(table)
    raise EvaluatorError(f"unknown evaluator {name!r}; known: {', '.join(KNOWN_EVALUATORS)}")
