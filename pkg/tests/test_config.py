import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcl_lab import DomainError, make_group
from lcl_lab.config import (
    ConfigError,
    RunConfig,
    from_dict,
    load_config,
    parse_config,
    parse_profile,
    parse_weight,
)
from lcl_lab.operators import BallPowerWeight, ExpPowerWeight, MatchedWeight, MultinomialWeight
from lcl_lab.profiles import BallPower, ExpPower, PiecewisePower, PowerLaw, Product, Sampled

G2 = make_group("euclidean", 2)


def test_profile_descriptors():
    assert parse_profile("power:1.5", G2, 1.0) == PowerLaw(1.5)
    assert parse_profile("const:2", G2, 1.0)(3.0) == pytest.approx(2.0)
    assert parse_profile("ball_power:0.5", G2, 1.0) == BallPower(0.5, G2)
    assert parse_profile("exp_power:0.3:2", G2, 1.0) == ExpPower(0.3, 2.0)
    f = parse_profile("cutoff_tail:auto:3", G2, 2.0)
    assert isinstance(f, PiecewisePower) and f.knots_[0] == pytest.approx(math.exp(1 / 4))
    g = parse_profile("cutoff_tail:2:3:4:0.5", G2, 1.0)
    assert g(1.0) == pytest.approx(4.0) and g(4.0) == pytest.approx(0.5 * 4.0 ** -3)
    s = parse_profile("sampled:1,2,4:1,2,8", G2, 1.0)
    assert isinstance(s, Sampled) and s(2.0) == pytest.approx(2.0)
    p = parse_profile("power:1 * exp_power:-1:1", G2, 1.0)
    assert isinstance(p, Product)


@pytest.mark.parametrize("text", ["power", "power:x", "wobble:1", "cutoff_tail:1", "sampled:1,2:1"])
def test_bad_profile_descriptors(text):
    with pytest.raises(DomainError):
        parse_profile(text, G2, 1.0)


def test_weight_descriptors():
    assert parse_weight("one") == BallPowerWeight(0.0)
    assert parse_weight("ball_power:1.5") == BallPowerWeight(1.5)
    assert parse_weight("exp_power:0.3:2") == ExpPowerWeight(0.3, 2.0)
    assert parse_weight("exp_power:0.3:2:4") == ExpPowerWeight(0.3, 2.0, 4.0)
    assert parse_weight("multinomial:1,2:2") == MultinomialWeight((1.0, 2.0), 2)
    assert parse_weight("matched:exp_power:1:0.5") == MatchedWeight(ExpPowerWeight(1.0, 0.5))
    w = parse_weight("profile:power:2")
    assert w.profile(G2)(3.0) == pytest.approx(9.0) and w.describe() == "profile:power:2"
    for bad in ("ball_power", "ball_power:a", "multinomial:1:0.5", "nope:1"):
        with pytest.raises(DomainError):
            parse_weight(bad)


def test_config_parse_and_field_paths():
    cfg = parse_config("""
group = "euclidean:2"
function = "cutoff_tail:auto:4"
[params]
p = 1
q = 2
beta = 0.5
[weights]
u = "ball_power:1"
v = "ball_power:0"
[criterion]
alpha = [1.0, 2]
""")
    assert cfg.params.q == 2.0 and isinstance(cfg.params.q, float)
    assert cfg.criterion.alpha == [1.0, 2.0]
    assert cfg.validate().group_obj().Q == 2.0
    for text, path in [("[params]\nsigma = 1", "params.sigma"),
                       ("[params]\np = 'one'", "params.p"),
                       ("[criterion]\nalpha = 3", "criterion.alpha"),
                       ("[quadrature]\nmax_subdivisions = 1.5", "quadrature.max_subdivisions"),
                       ("[verify]\nside = true", "verify.side"),
                       ("colour = 'red'", "colour"),
                       ("params = 3", "params"),
                       ("x = [", "config")]:
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.path == path


@pytest.mark.parametrize("data,path", [
    ({"group": "torus:3"}, "group"),
    ({"params": {"p": 3.0, "q": 1.0}}, "params"),
    ({"weights": {"u": "wat"}}, "weights.u"),
    ({"function": "power"}, "function"),
    ({"quadrature": {"rel_tol": -1.0}}, "quadrature"),
    ({"bounds": {"side": "up"}}, "bounds.side"),
    ({"sharpness": {"n_probes": 0}}, "sharpness.n_probes"),
])
def test_validate_reports_field_paths(data, path):
    with pytest.raises(ConfigError) as info:
        from_dict(data).validate()
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_load_config(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('group = "custom:3:5"\n[params]\nbeta = 2.0\n')
    cfg = load_config(str(p))
    assert cfg.group == "custom:3:5" and cfg.params.beta == 2.0
    p.write_text("[[[")
    with pytest.raises(ConfigError):
        load_config(str(p))


def test_override_and_digest():
    cfg = RunConfig()
    other = cfg.with_override("params.beta", 3.0)
    assert other.params.beta == 3.0 and cfg.params.beta == 1.0
    assert other.digest() != cfg.digest() and RunConfig().digest() == cfg.digest()
    with pytest.raises(ConfigError):
        cfg.with_override("params.gamma", 1.0)


configs = st.builds(
    lambda p, extra, beta, alpha, a, n, axes: from_dict({
        "group": "anisotropic:1.0,2.0:3.5",
        "params": {"p": p, "q": p * extra, "beta": beta, **({"alpha": alpha} if alpha else {})},
        "weights": {"u": f"ball_power:{a!r}", "v": "exp_power:-1.0:0.5"},
        "criterion": {"alpha": [1.0, alpha or 2.0]},
        "sharpness": {"n_probes": n, "side": "both"},
        "sweep": {"command": "criterion", "axes": axes},
    }),
    st.floats(0.1, 5), st.floats(1, 3), st.floats(0.1, 5), st.one_of(st.none(), st.floats(0.1, 10)),
    st.floats(-3, 3), st.integers(1, 20),
    st.dictionaries(st.sampled_from(["params.beta", "params.p"]),
                    st.lists(st.floats(0.5, 2), min_size=1, max_size=3), max_size=2),
)


@settings(max_examples=50, deadline=None)
@given(cfg=configs)
def test_toml_round_trip(cfg):
    again = parse_config(cfg.to_toml())
    assert again == cfg
    assert again.digest() == cfg.digest()
