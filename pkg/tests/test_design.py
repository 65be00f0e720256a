import numpy as np
import pytest

from leakaudit import (
    ChannelPolicy,
    ConfigError,
    DesignTemplate,
    SurrogateSpec,
    default_class_map,
    domain_windows,
    load_dataset,
    reorganize,
    required_duration,
    save_dataset,
    synth,
    template_by_name,
)


class TestTemplates:
    def test_cvpr_canonical_parameters(self):
        t = template_by_name("cvpr_like")
        assert t.n_domains == 40
        assert t.domain_duration_s == 25.0
        assert t.rest_duration_s == (10.0, 10.0)
        assert t.sample_length_s == 0.5
        assert t.target_fs == 1000.0
        assert t.channel_policy == ChannelPolicy("replicate_to", 128)
        assert t.samples_per_domain == 50

    def test_deap_canonical_parameters(self):
        t = template_by_name("deap_like")
        assert (t.n_domains, t.domain_duration_s, t.rest_duration_s) == (40, 60.0, (40.0, 40.0))
        assert (t.sample_length_s, t.target_fs, t.n_classes) == (2.0, 128.0, 4)
        assert t.channel_policy == ChannelPolicy("first_k", 32)

    def test_kul_canonical_parameters(self):
        t = template_by_name("kul_like")
        assert (t.n_domains, t.domain_duration_s) == (8, 360.0)
        assert t.rest_duration_s == (60.0, 120.0)
        assert (t.sample_length_s, t.target_fs, t.n_classes) == (1.0, 128.0, 2)

    def test_duration_must_divide(self):
        with pytest.raises(ConfigError):
            DesignTemplate(
                name="custom", n_domains=2, domain_duration_s=5.0, rest_duration_s=(1.0, 1.0),
                sample_length_s=2.0, target_fs=32.0, channel_policy=ChannelPolicy("keep_all"),
                n_classes=2, class_map={0: 0, 1: 1},
            )

    def test_class_map_must_cover_domains(self):
        with pytest.raises(ConfigError):
            DesignTemplate(
                name="custom", n_domains=3, domain_duration_s=4.0, rest_duration_s=(1.0, 1.0),
                sample_length_s=1.0, target_fs=32.0, channel_policy=ChannelPolicy("keep_all"),
                n_classes=2, class_map={0: 0, 1: 1},
            )


class TestClassMaps:
    def test_cvpr_identity(self):
        cmap = default_class_map("cvpr_like", 40)
        assert cmap == {d: d for d in range(40)}

    @pytest.mark.parametrize("seed", [0, 1, 17])
    def test_deap_balanced(self, seed):
        cmap = default_class_map("deap_like", 40, seed=seed)
        counts = np.bincount(list(cmap.values()), minlength=4)
        assert counts.tolist() == [10, 10, 10, 10]

    def test_kul_alternating(self):
        cmap = default_class_map("kul_like", 8)
        assert [cmap[d] for d in range(8)] == [0, 1, 0, 1, 0, 1, 0, 1]
        counts = np.bincount(list(cmap.values()))
        assert counts.tolist() == [4, 4]

    def test_custom_requires_map(self):
        with pytest.raises(ConfigError):
            default_class_map("custom", 4)


class TestRequiredDuration:
    def test_cvpr(self):
        assert required_duration(template_by_name("cvpr_like")) == 40 * 25 + 39 * 10  # 1390

    def test_deap(self):
        assert required_duration(template_by_name("deap_like")) == 40 * 60 + 39 * 40  # 3960

    def test_kul_uses_max_rest(self):
        assert required_duration(template_by_name("kul_like")) == 8 * 360 + 7 * 120

    def test_single_domain(self):
        t = DesignTemplate(
            name="custom", n_domains=1, domain_duration_s=12.0, rest_duration_s=(5.0, 9.0),
            sample_length_s=3.0, target_fs=16.0, channel_policy=ChannelPolicy("keep_all"),
            n_classes=1, class_map={0: 0},
        )
        assert required_duration(t) == 12.0


class TestChannelPolicy:
    def test_replicate_duplicates_block(self):
        data = np.arange(12, dtype=np.float32).reshape(4, 3)
        out = ChannelPolicy("replicate_to", 8).apply(data)
        assert out.shape == (8, 3)
        assert np.array_equal(out[:4], data)
        assert np.array_equal(out[4:], data)

    def test_first_k_order(self):
        data = np.arange(20, dtype=np.float32).reshape(5, 4)
        out = ChannelPolicy("first_k", 3).apply(data)
        assert np.array_equal(out, data[:3])

    def test_replicate_requires_multiple(self):
        with pytest.raises(ConfigError):
            ChannelPolicy("replicate_to", 10).apply(np.ones((4, 3)))

    def test_parse_round_trip(self):
        for text in ("keep_all", "first_k(32)", "replicate_to(128)"):
            assert str(ChannelPolicy.parse(text)) == text


class TestReorganize:
    def test_deap_counts(self):
        template = template_by_name("deap_like")
        spec = SurrogateSpec(kind="white", duration_s=3962.0, fs=128.0, channels=32, seed=0)
        ds = reorganize(synth(spec), template, subject_id=3, seed=0)
        assert len(ds) == 40 * 30
        assert all(s.data.shape == (32, 256) for s in ds.samples[:5])
        counts = np.bincount(ds.domain_ids)
        assert np.all(counts == 30)

    def test_kul_counts_and_balance(self):
        template = template_by_name("kul_like")
        spec = SurrogateSpec(kind="white", duration_s=3722.0, fs=128.0, channels=8, seed=1)
        ds = reorganize(synth(spec), template, seed=1)
        assert len(ds) == 8 * 360
        class_counts = np.bincount(ds.class_ids)
        assert class_counts.tolist() == [1440, 1440]

    def test_temporal_exclusivity_and_rest_exclusion(self, tiny_template):
        spec = SurrogateSpec(kind="white", duration_s=60.0, fs=32.0, channels=2, seed=2)
        ds = reorganize(synth(spec), tiny_template, seed=2)
        length = tiny_template.sample_length_s
        starts = np.sort(ds.t_starts)
        assert np.all(np.diff(starts) >= length - 1e-9)
        windows = domain_windows(tiny_template, seed=2)
        for s in ds.samples:
            inside = any(t0 - 1e-9 <= s.t_start and s.t_start + length <= t1 + 1e-9
                         for t0, t1 in windows)
            assert inside

    def test_too_short_reports_shortfall(self, tiny_template):
        spec = SurrogateSpec(kind="white", duration_s=30.0, fs=32.0, channels=2, seed=0)
        with pytest.raises(ConfigError, match="short by"):
            reorganize(synth(spec), tiny_template)

    def test_resamples_when_needed(self, tiny_template):
        spec = SurrogateSpec(kind="white", duration_s=60.0, fs=64.0, channels=2, seed=3)
        ds = reorganize(synth(spec), tiny_template, seed=3)
        assert ds.samples[0].data.shape == (2, 32)

    def test_range_rests_are_seeded(self):
        template = DesignTemplate(
            name="custom", n_domains=3, domain_duration_s=4.0, rest_duration_s=(1.0, 3.0),
            sample_length_s=1.0, target_fs=16.0, channel_policy=ChannelPolicy("keep_all"),
            n_classes=3, class_map={0: 0, 1: 1, 2: 2},
        )
        w1 = domain_windows(template, seed=5)
        w2 = domain_windows(template, seed=5)
        w3 = domain_windows(template, seed=6)
        assert w1 == w2
        assert w1 != w3
        for (_, end), (start, _) in zip(w1[:-1], w1[1:]):
            assert 1.0 - 1e-9 <= start - end <= 3.0 + 1e-9


class TestDatasetSerialization:
    def test_round_trip(self, tmp_path, tiny_template):
        spec = SurrogateSpec(kind="powerlaw", beta=1.0, duration_s=60.0, fs=32.0, channels=2, seed=4)
        ds = reorganize(synth(spec), tiny_template, subject_id=7, seed=4)
        save_dataset(ds, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds")
        assert len(loaded) == len(ds)
        assert loaded.subject_id == 7
        assert loaded.template == ds.template
        assert np.array_equal(loaded.domain_ids, ds.domain_ids)
        assert np.array_equal(loaded.class_ids, ds.class_ids)
        assert np.array_equal(loaded.stack(), ds.stack())

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ConfigError):
            load_dataset(tmp_path)
