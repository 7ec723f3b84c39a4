import pytest
import torch

from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    ParameterError,
)
from fewshape.model import ModelConfig, ReconstructionModel
from fewshape.priors import PriorKind
from fewshape.training import predict_batch

from .entities import tiny_config, tiny_registry


def images(n=2, seed=0):
    g = torch.Generator().manual_seed(seed)
    return torch.rand(n, 3, 64, 64, generator=g)


@pytest.mark.parametrize(
    ["kind", "key", "shape"],
    [
        (PriorKind.GCE, "priors.GCE.can.embedding.embeddings", (64,)),
        (
            PriorKind.CGCE,
            "priors.CGCE.ring.embedding.attention.logits",
            (5, 6),
        ),
        (
            PriorKind.MCCE_DEC,
            "priors.MCCE_dec.ring.decoder.norm0.gamma",
            (32,),
        ),
        (
            PriorKind.CAB_DEC,
            "priors.CAB_dec.stack.decoder.norm0.attention.logits",
            (5, 6),
        ),
    ],
)
def test_checkpoint_archive_names(kind, key, shape):
    model = ReconstructionModel(tiny_config(kind), tiny_registry())
    archive = model.checkpoint_state()
    assert archive[key].shape == shape
    assert "ready" in archive
    assert not any(k.startswith("prior.") for k in archive)


def test_shared_codebooks_are_stored_once():
    model = ReconstructionModel(tiny_config(PriorKind.CGCE), tiny_registry())
    archive = model.checkpoint_state()
    assert archive["priors.CGCE.shared.embedding.codes.codes"].shape == (
        5,
        6,
        64,
    )


def test_unconditioned_model_ignores_classes():
    model = ReconstructionModel(tiny_config(), tiny_registry()).eval()
    x = images()
    with torch.no_grad():
        a = model(x)
        b = model(x, torch.tensor([0, 1]))
    assert a.shape == (2, 16, 16, 16)
    assert torch.equal(a, b)
    assert not model.tables()


def test_conditioned_model_needs_classes():
    model = ReconstructionModel(tiny_config(PriorKind.GCE), tiny_registry())
    with pytest.raises(ConfigurationError):
        model(images())


def test_initialization_is_seeded():
    a = ReconstructionModel(tiny_config(PriorKind.HYBRID), tiny_registry())
    b = ReconstructionModel(tiny_config(PriorKind.HYBRID), tiny_registry())
    c = ReconstructionModel(
        tiny_config(PriorKind.HYBRID, seed=1), tiny_registry()
    )
    for (name, p), q in zip(a.state_dict().items(), b.state_dict().values()):
        assert torch.equal(p, q), name
    assert not torch.equal(a.decoder.final.weight, c.decoder.final.weight)


def test_ready_classes():
    model = ReconstructionModel(tiny_config(PriorKind.GCE), tiny_registry())
    assert model.ready_classes() == []
    model.mark_ready(["stack"])
    assert model.ready_classes() == ["stack"]
    model.check_ready(torch.tensor([1, 1]))
    with pytest.raises(ClassLookupError) as exc_info:
        model.check_ready(torch.tensor([0, 1, 2]))
    assert exc_info.value.class_ids == ["can", "ring"]
    model.reinitialize_classes(["stack"], seed=0)
    assert model.ready_classes() == []


def test_adaptable_parameters_follow_variant():
    gce = ReconstructionModel(tiny_config(PriorKind.GCE), tiny_registry())
    assert list(gce.adaptable_parameters()) == ["prior.embeddings"]
    mcce = ReconstructionModel(
        tiny_config(PriorKind.MCCE_DEC), tiny_registry()
    )
    names = list(mcce.adaptable_parameters())
    assert names and all(n.startswith("decoder.") for n in names)
    assert all(n.endswith((".gamma", ".beta")) for n in names)


def test_save_and_load_round_trip(tmp_path, trained_model):
    model = trained_model(PriorKind.GCE)
    path = model.save(tmp_path / "model.pt", cli_variant="gce")
    loaded, header = ReconstructionModel.load(path)
    assert header["cli_variant"] == "gce"
    assert header["model"]["variant"] == "GCE"
    assert loaded.ready_classes() == ["can", "stack"]
    x = images(2, seed=3)
    expected = predict_batch(model, x, ["can", "stack"])
    assert torch.equal(predict_batch(loaded, x, ["can", "stack"]), expected)


def test_loading_mismatched_archive():
    model = ReconstructionModel(tiny_config(PriorKind.GCE), tiny_registry())
    archive = model.checkpoint_state()
    del archive["priors.GCE.ring.embedding.embeddings"]
    with pytest.raises(ConfigurationError):
        model.load_checkpoint_state(archive)
    other = ReconstructionModel(tiny_config(PriorKind.NONE), tiny_registry())
    with pytest.raises(ConfigurationError):
        other.load_checkpoint_state(model.checkpoint_state())


def test_model_config_validation():
    with pytest.raises(ConfigurationError):
        ModelConfig(variant=PriorKind.GCE, single_shape_prior=True)
    with pytest.raises(ParameterError):
        ModelConfig(num_codebooks=0)
    assert tiny_config(PriorKind.GCE).decoder_input_dim == 128
    assert tiny_config(PriorKind.WALLACE_AVG).decoder_input_dim == 64
    config = ModelConfig.from_dict(tiny_config(PriorKind.CGCE).to_dict())
    assert config == tiny_config(PriorKind.CGCE)
