"""Full training runs on the synthetic corpus with the shipped configuration"""

import pytest

from path_srl.config import load_config
from path_srl.evaluation import score
from path_srl.pipeline import label_corpus, label_sentence
from path_srl.training.train_pipeline import labeling_options, train_bundle

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def config(monkeypatch_module):
    return load_config()


@pytest.fixture(scope="module")
def monkeypatch_module():
    with pytest.MonkeyPatch.context() as patch:
        patch.delenv("PATHSRL_SEED", raising=False)
        yield patch


@pytest.fixture(scope="module")
def full_run(toy_train, toy_heldout, config):
    return train_bundle(toy_train, toy_heldout, config)


def _f1(corpus, run, config):
    bundle = run.bundle
    return score(corpus, label_corpus(corpus, bundle, bundle.reranker, labeling_options(config))).f1


def test_fits_the_training_corpus(full_run, toy_train, config):
    assert _f1(toy_train, full_run, config) >= 99.0


def test_generalizes_to_heldout(full_run, toy_heldout, config):
    assert _f1(toy_heldout, full_run, config) >= 90.0
    assert full_run.dev_f1 >= 90.0


def test_labels_the_control_example(full_run, trouble):
    bare = trouble.with_annotation([(4, "raise.01", {})])
    labeled = label_sentence(bare, full_run.bundle, full_run.bundle.reranker)
    assert labeled == trouble


@pytest.mark.parametrize("ablation", ["path", "binary"])
def test_full_model_beats_each_ablation(full_run, toy_train, toy_heldout, config, ablation):
    ablated = train_bundle(toy_train, toy_heldout, load_config(ablation=[ablation]))
    assert full_run.dev_f1 > ablated.dev_f1
