import numpy as np
import pytest

import _synth
from modcoach import _kernels
from modcoach.audio import (
    SampleBuffer,
    count_syllables,
    count_syllables_detailed,
    decode_wav,
    encode_wav,
    frame_rms,
    track_pitch,
    word_acoustics,
)
from modcoach.errors import AudioFormatError, ValidationError

SR = _synth.SR


class TestDecode:
    def test_silence_sample_count(self):
        buf = decode_wav(_synth.wav_bytes(np.zeros(SR)))
        assert len(buf.samples) == SR
        assert np.all(buf.samples == 0.0)
        assert buf.sample_rate == SR

    def test_full_scale_scaling(self):
        pcm = np.array([32767, -32768, 0], dtype=np.int16)
        raw = _synth.wav_bytes(pcm.astype(np.float64) / 32768.0)
        buf = decode_wav(raw)
        assert buf.samples[0] == pytest.approx(32767 / 32768, abs=1e-12)
        assert buf.samples[1] == pytest.approx(-1.0, abs=1e-12)

    def test_stereo_rejected(self):
        import io
        import wave
        out = io.BytesIO()
        with wave.open(out, "wb") as wav:
            wav.setnchannels(2)
            wav.setsampwidth(2)
            wav.setframerate(SR)
            wav.writeframes(b"\x00\x00\x00\x00" * 100)
        with pytest.raises(AudioFormatError, match="channels"):
            decode_wav(out.getvalue())

    def test_wrong_width_rejected(self):
        import io
        import wave
        out = io.BytesIO()
        with wave.open(out, "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(1)
            wav.setframerate(SR)
            wav.writeframes(b"\x00" * 100)
        with pytest.raises(AudioFormatError, match="16-bit"):
            decode_wav(out.getvalue())

    def test_garbage_rejected(self):
        with pytest.raises(AudioFormatError):
            decode_wav(b"this is not audio")

    def test_truncated_rejected(self):
        raw = _synth.wav_bytes(np.zeros(SR))
        with pytest.raises(AudioFormatError):
            decode_wav(raw[: len(raw) // 2])

    def test_44k_accepted(self):
        buf = decode_wav(_synth.wav_bytes(np.zeros(44100), sr=44100))
        assert buf.sample_rate == 44100

    def test_round_trip(self):
        samples = _synth.sine(220, 0.25, amp=0.5)
        buf = decode_wav(encode_wav(SampleBuffer(samples, SR)))
        assert np.max(np.abs(buf.samples - samples)) < 1.0 / 32768


class TestFrameRms:
    def test_constant_signal(self):
        series = frame_rms(SampleBuffer(np.full(SR, 0.5), SR))
        assert np.allclose(series.values, 0.5)

    def test_sine_rms(self):
        # 200 Hz at 16 kHz: the 80-sample period divides the 480-sample frame.
        series = frame_rms(SampleBuffer(_synth.sine(200, 1.0, amp=0.8), SR))
        assert np.max(np.abs(series.values - 0.8 / np.sqrt(2))) < 1e-3

    def test_silence(self):
        series = frame_rms(SampleBuffer(np.zeros(SR), SR))
        assert np.all(series.values == 0.0)

    def test_short_buffer_pads_single_frame(self):
        series = frame_rms(SampleBuffer(np.full(100, 1.0), SR))
        assert len(series) == 1
        # 100 ones in a 480-sample frame: rms = sqrt(100/480)
        assert series.values[0] == pytest.approx(np.sqrt(100 / 480))

    def test_scale_equivariance(self):
        rng = np.random.default_rng(3)
        x = rng.normal(0, 0.2, SR).clip(-1, 1)
        base = frame_rms(SampleBuffer(x, SR)).values
        scaled = frame_rms(SampleBuffer(x * 0.125, SR)).values
        assert np.max(np.abs(scaled - 0.125 * base)) < 1e-9

    def test_bad_params(self):
        with pytest.raises(ValidationError):
            frame_rms(SampleBuffer(np.zeros(SR), SR), frame_ms=5, hop_ms=10)

    def test_start_times_increase_by_hop(self):
        series = frame_rms(SampleBuffer(np.zeros(SR), SR))
        diffs = np.diff(series.start_times)
        assert np.allclose(diffs, series.hop / SR)


class TestPitch:
    @pytest.mark.parametrize("freq", [110.0, 220.0, 440.0])
    def test_sine_within_5hz(self, freq):
        series = track_pitch(SampleBuffer(_synth.sine(freq, 1.0), SR))
        voiced = series.values[series.values > 0]
        assert len(voiced) > 0.8 * len(series)
        assert abs(np.median(voiced) - freq) < 5.0
        assert np.all(np.abs(voiced - freq) < 5.0)

    def test_white_noise_unvoiced(self):
        series = track_pitch(SampleBuffer(_synth.noise(1.0, seed=7), SR))
        assert np.mean(series.values == 0.0) >= 0.95

    def test_silence_unvoiced(self):
        series = track_pitch(SampleBuffer(np.zeros(SR), SR))
        assert np.all(series.values == 0.0)

    def test_amplitude_invariance(self):
        x = _synth.sine(220, 0.5, amp=0.6)
        a = track_pitch(SampleBuffer(x, SR)).values
        b = track_pitch(SampleBuffer(x * 0.5, SR)).values
        voiced = (a > 0) & (b > 0)
        assert np.all(np.abs(a[voiced] - b[voiced]) < 1.0)

    def test_44k_sample_rate(self):
        series = track_pitch(SampleBuffer(_synth.sine(220, 0.5, sr=44100), 44100))
        voiced = series.values[series.values > 0]
        assert len(voiced) > 0.8 * len(series)
        assert abs(np.median(voiced) - 220) < 5.0

    def test_bad_band_rejected(self):
        with pytest.raises(ValidationError):
            track_pitch(SampleBuffer(np.zeros(SR), SR), f_min=500, f_max=200)


class TestKernelParity:
    def test_rms_paths_agree(self):
        rng = np.random.default_rng(11)
        x = rng.normal(0, 0.3, 4 * SR).clip(-1, 1)
        a = _kernels.rms_frames_numpy(x, 480, 160, 100)
        if _kernels.rms_frames_numba is not None:
            b = _kernels.rms_frames_numba(x, 480, 160, 100)
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_diff_paths_agree(self):
        rng = np.random.default_rng(12)
        frames = rng.normal(0, 0.3, (20, 640))
        a = _kernels.diff_frames_numpy(frames, 268)
        if _kernels.diff_frames_numba is not None:
            b = _kernels.diff_frames_numba(frames, 268)
            assert np.allclose(a, b, rtol=1e-8, atol=1e-8)


class TestSyllables:
    @pytest.mark.parametrize("word,expected", [
        ("point", 1), ("enemy", 3), ("the", 1), ("a", 1), ("making", 2),
        ("an", 1), ("art", 1), ("tact", 1), ("without", 2), ("beautiful", 3),
        ("rhythm", 1), ("yes", 1), ("only", 2), ("idea", 2),
    ])
    def test_reference_words(self, word, expected):
        assert count_syllables(word) == expected

    def test_punctuation_stripped(self):
        assert count_syllables("enemy.") == 3
        assert count_syllables('"point!"') == 1

    def test_no_letters_fallback(self):
        count, fallback = count_syllables_detailed("1234")
        assert count == 1 and fallback

    def test_always_at_least_one(self):
        for token in ["b", "tsk", "e", "xyz", ""]:
            assert count_syllables(token) >= 1


class TestWordAcoustics:
    def test_word_spanning_silence(self):
        buf, record = _synth.render_sentence([
            ("loud", 0.5, 180, 0.5, 0.05),
            ("quiet", 0.5, 0, 0.0, 0.05),
            ("loud", 0.5, 180, 0.5, 0.0),
        ])
        feats = word_acoustics(buf, record)
        assert feats[1].mean_volume == pytest.approx(0.0, abs=1e-6)
        assert feats[1].mean_f0 == 0.0

    def test_spm_formula(self):
        buf, record = _synth.render_sentence([("KIloWATT", 0.5, 150, 0.3, 0.0)])
        feats = word_acoustics(buf, record)
        assert feats[0].syllables == 3
        assert feats[0].spm == pytest.approx(3 / (0.5 / 60))

    def test_two_syllable_half_second_spm_240(self):
        buf, record = _synth.render_sentence([("paper", 0.5, 150, 0.3, 0.0)])
        assert word_acoustics(buf, record)[0].spm == pytest.approx(240.0)

    def test_double_amplitude_word(self):
        buf, record = _synth.render_sentence([
            ("one", 0.6, 160, 0.25, 0.1),
            ("two", 0.6, 160, 0.5, 0.1),
            ("three", 0.6, 160, 0.25, 0.0),
        ])
        feats = word_acoustics(buf, record)
        ratio = feats[1].mean_volume / feats[0].mean_volume
        assert ratio == pytest.approx(2.0, rel=0.05)

    def test_gap_after(self):
        buf, record = _synth.render_sentence([
            ("a", 0.4, 150, 0.3, 0.7),
            ("b", 0.4, 150, 0.3, 0.0),
        ])
        feats = word_acoustics(buf, record)
        assert feats[0].gap_after == pytest.approx(0.7, abs=1e-6)
        assert feats[1].gap_after == 0.0

    def test_order_and_count_preserved(self):
        specs = [(f"w{i}", 0.3, 140 + 10 * i, 0.3, 0.05) for i in range(5)]
        buf, record = _synth.render_sentence(specs)
        feats = word_acoustics(buf, record)
        assert len(feats) == 5
        assert [round(f.duration, 3) for f in feats] == [0.3] * 5

    def test_short_word_uses_nearest_frame(self):
        buf, record = _synth.render_sentence([
            ("long", 0.5, 150, 0.3, 0.0),
            ("x", 0.004, 150, 0.3, 0.0),
            ("tail", 0.5, 150, 0.3, 0.0),
        ])
        feats = word_acoustics(buf, record)
        assert feats[1].mean_volume > 0

    def test_timing_beyond_buffer_rejected(self):
        buf, record = _synth.render_sentence([("word", 0.5, 150, 0.3, 0.0)])
        bad = record.__class__(id=record.id, talk_id=record.talk_id,
                               words=(record.words[0].__class__(
                                   text="word", start=0.05, end=99.0),),
                               text=record.text)
        with pytest.raises(ValidationError):
            word_acoustics(buf, bad)

    def test_pitch_of_high_word(self):
        buf, record = _synth.render_sentence([
            ("low", 0.5, 120, 0.3, 0.05),
            ("high", 0.5, 260, 0.3, 0.05),
            ("low", 0.5, 120, 0.3, 0.0),
        ])
        feats = word_acoustics(buf, record)
        assert feats[1].mean_f0 == pytest.approx(260, abs=8)
        assert feats[0].mean_f0 == pytest.approx(120, abs=8)
