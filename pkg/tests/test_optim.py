"""Adam optimizer contract."""

import numpy as np
import pytest

from sketchrec.core import AdamConfig, Parameter, adam_step, backward


def test_defaults():
    cfg = AdamConfig()
    assert cfg.learning_rate == 3e-4
    assert cfg.beta1 == 0.9
    assert cfg.beta2 == 0.999
    assert cfg.epsilon == 1e-8


@pytest.mark.parametrize("bad", [
    dict(learning_rate=0.0),
    dict(beta1=1.0),
    dict(beta2=0.0),
    dict(epsilon=-1e-8),
])
def test_invalid_config_rejected(bad):
    with pytest.raises(ValueError):
        AdamConfig(**bad)


def test_zero_gradient_leaves_parameter_unchanged():
    p = Parameter(np.array([1.5, -2.0]), "p")
    p.grad = np.zeros(2)
    adam_step([p], AdamConfig())
    np.testing.assert_array_equal(p.data, [1.5, -2.0])


def test_first_step_hand_value():
    # p=1, grad=1, lr=3e-4: bias correction gives m_hat = v_hat = 1,
    # so the update is lr * 1 / (1 + eps) ~= lr
    p = Parameter(np.array([1.0]), "p")
    p.grad = np.array([1.0])
    adam_step([p], AdamConfig(learning_rate=3e-4))
    assert p.data[0] == pytest.approx(1.0 - 3e-4, abs=1e-10)
    assert p.grad is None  # cleared after the step
    assert p.adam_step_count == 1


def test_missing_gradient_skipped_with_count():
    p = Parameter(np.ones(2), "with_grad")
    q = Parameter(np.ones(2), "without_grad")
    backward((p * 2.0).sum())
    skipped = adam_step([p, q], AdamConfig())
    assert skipped == 1
    assert q.adam_step_count == 0
    assert not np.array_equal(p.data, np.ones(2))


def test_step_count_monotone_and_state_shapes():
    p = Parameter(np.ones((2, 3)), "p")
    for expected in (1, 2, 3):
        p.grad = np.full((2, 3), 0.1)
        adam_step([p], AdamConfig())
        assert p.adam_step_count == expected
    assert p.adam_m.shape == p.data.shape
    assert p.adam_v.shape == p.data.shape


def test_full_scale_defaults_echo():
    from sketchrec.training import RunConfig

    cfg = RunConfig.full_defaults()
    assert cfg.learning_rate == 3e-4
    assert cfg.batch_size == 128
    assert cfg.epochs == 200
