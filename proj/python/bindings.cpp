#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fvnlab/acceptance.hpp"
#include "fvnlab/align.hpp"
#include "fvnlab/analysis.hpp"
#include "fvnlab/codes.hpp"
#include "fvnlab/compressor.hpp"
#include "fvnlab/pipeline.hpp"
#include "fvnlab/sequencer.hpp"
#include "fvnlab/shaping.hpp"
#include "fvnlab/simharness.hpp"
#include "fvnlab/velvet.hpp"
#include "fvnlab/window.hpp"

namespace py = pybind11;
using namespace fvnlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> x) {
  Array out(static_cast<py::ssize_t>(x.size()));
  std::copy(x.begin(), x.end(), out.mutable_data());
  return out;
}

Array to_array(const SampledSignal& s) { return to_array(s.samples()); }

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ValidationError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

SampledSignal to_signal(const Array& a, double fs) { return SampledSignal(to_vector(a), fs); }

std::vector<SampledSignal> to_signals(const std::vector<Array>& arrays, double fs) {
  std::vector<SampledSignal> out;
  for (const auto& a : arrays) out.push_back(to_signal(a, fs));
  return out;
}

py::list to_list(const std::vector<SampledSignal>& signals) {
  py::list out;
  for (const auto& s : signals) out.append(to_array(s));
  return out;
}

py::dict measurement_dict(const MeasurementResult& r) {
  py::dict d;
  d["per_code_irs"] = to_list(r.per_code_irs);
  d["linear_ir"] = r.linear_ir ? py::object(to_array(*r.linear_ir)) : py::none();
  d["deviations"] = to_list(r.deviations);
  d["deviation_rms"] = r.deviation_rms;
  d["code_length"] = r.code_length;
  d["first_period"] = r.window.first_period;
  d["periods_averaged"] = r.window.count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-domain velvet noise measurement toolkit";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ProcessingError>(m, "ProcessingError", PyExc_RuntimeError);

  py::class_<FvnSpec>(m, "FvnSpec")
      .def(py::init([](double sigma_t, double fs, std::uint64_t seed) { return FvnSpec::with_defaults(sigma_t, fs, seed); }),
           py::arg("sigma_t") = 0.1, py::arg("fs") = 44100.0, py::arg("seed") = 0)
      .def_readwrite("sigma_t", &FvnSpec::sigma_t)
      .def_readwrite("fd_hz", &FvnSpec::fd_hz)
      .def_readwrite("bw_hz", &FvnSpec::bw_hz)
      .def_readwrite("phi_max", &FvnSpec::phi_max)
      .def_readwrite("fs", &FvnSpec::fs)
      .def_readwrite("dft_size", &FvnSpec::dft_size)
      .def_readwrite("seed", &FvnSpec::seed)
      .def("validate", &FvnSpec::validate)
      .def("__repr__", [](const FvnSpec& s) {
        return "FvnSpec(sigma_t=" + std::to_string(s.sigma_t) + ", dft_size=" + std::to_string(s.dft_size) +
               ", seed=" + std::to_string(s.seed) + ")";
      });

  m.def("six_term_coefficients", [] { return std::vector<double>(kSixTermCoefficients.begin(), kSixTermCoefficients.end()); });
  m.def("fvn_phase", [](const FvnSpec& s) { return to_array(fvn_phase(s).phase); });
  m.def("synthesize_unit_fvn", [](const FvnSpec& s) { return to_array(synthesize_unit_fvn(s)); },
        "Raw inverse DFT of the unit-magnitude FVN spectrum, envelope around sample 0.");
  m.def("placement_unit", [](const FvnSpec& s) { return to_array(placement_unit(s)); },
        "Unit FVN rotated by half the DFT size, as placed into test signals.");
  m.def("envelope_flank_ratio", [](const FvnSpec& s) { return envelope_diagnostics(s).flank_ratio(); });

  m.def("code_matrix", [](std::size_t rows) {
    const auto c = build_code_matrix(rows);
    py::array_t<int> out({static_cast<py::ssize_t>(c.rows()), static_cast<py::ssize_t>(c.length())});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < c.rows(); ++r)
      for (std::size_t n = 0; n < c.length(); ++n) w(r, n) = c.at(r, n);
    return out;
  });

  m.def(
      "assemble_sequence",
      [](const FvnSpec& spec, std::size_t code_rows, std::size_t code_row, std::size_t period, std::size_t repetitions,
         std::size_t guard_periods) {
        const SequencePlan plan{spec, code_row, period, repetitions, guard_periods};
        return to_array(assemble_sequence(plan, build_code_matrix(code_rows)));
      },
      py::arg("spec"), py::arg("code_rows"), py::arg("code_row"), py::arg("period"), py::arg("repetitions"),
      py::arg("guard_periods") = 2);

  m.def("pulse_compress", [](const Array& recorded, const Array& unit, double fs) {
    return to_array(pulse_compress(to_signal(recorded, fs), to_signal(unit, fs)));
  }, py::arg("recorded"), py::arg("unit"), py::arg("fs"));

  m.def(
      "demultiplex",
      [](const Array& recorded, const std::vector<Array>& units, std::size_t code_rows, std::size_t period,
         std::size_t repetitions, std::size_t guard_periods, double fs) {
        std::vector<DemuxChannel> channels;
        for (std::size_t i = 0; i < units.size(); ++i) channels.push_back({to_signal(units[i], fs), i});
        auto r = demultiplex(to_signal(recorded, fs), channels, build_code_matrix(code_rows),
                             {period, repetitions, guard_periods});
        if (r.per_code_irs.size() >= 2) r = separate_nonlinear(std::move(r));
        return measurement_dict(r);
      },
      py::arg("recorded"), py::arg("units"), py::arg("code_rows"), py::arg("period"), py::arg("repetitions"),
      py::arg("guard_periods") = 2, py::arg("fs") = 44100.0,
      "Channel i is demodulated with code row i.");

  m.def("fit_slope_filter", [](double db_per_octave, double fs) {
    const auto f = fit_slope_filter(db_per_octave, fs);
    return std::vector<double>(f.coefficients().begin(), f.coefficients().end());
  }, py::arg("db_per_octave"), py::arg("fs") = 44100.0);
  m.def("shape_spectrum", [](const Array& x, const std::vector<double>& a, double fs) {
    return to_array(shape_spectrum(to_signal(x, fs), ShapingFilter(a)));
  }, py::arg("x"), py::arg("a"), py::arg("fs") = 44100.0);
  m.def("inverse_shape", [](const Array& x, const std::vector<double>& a, double fs) {
    return to_array(inverse_shape(to_signal(x, fs), ShapingFilter(a)));
  }, py::arg("x"), py::arg("a"), py::arg("fs") = 44100.0);

  m.def(
      "third_octave_spectrum",
      [](const Array& ir, double fs, std::optional<std::size_t> length, double calibration_db) {
        const auto sig = to_signal(ir, fs);
        const auto q = third_octave_smooth(power_spectrum(sig, length.value_or(sig.size())), {1.0, calibration_db});
        return py::make_tuple(to_array(q.freqs), to_array(q.level_db));
      },
      py::arg("ir"), py::arg("fs"), py::arg("length") = py::none(), py::arg("calibration_db") = 0.0,
      "Returns (frequencies, levels in dB) of the one-third-octave smoothed power spectrum.");

  m.def(
      "simulate",
      [](const std::vector<Array>& inputs, double fs, const std::string& target_json, std::uint64_t seed) {
        return to_array(simulate(parse_sim_target(target_json), to_signals(inputs, fs), seed));
      },
      py::arg("inputs"), py::arg("fs"), py::arg("target_json"), py::arg("seed") = 0);
  m.def("apply_linear_drift", [](const Array& x, double fs, double ppm) {
    return to_array(apply_drift(to_signal(x, fs), DriftSpec::linear(ppm)));
  }, py::arg("x"), py::arg("fs"), py::arg("ppm"));
  m.def("apply_sinusoidal_drift", [](const Array& x, double fs, double depth_s, double rate_hz) {
    return to_array(apply_drift(to_signal(x, fs), DriftSpec::sinusoidal(depth_s, rate_hz)));
  }, py::arg("x"), py::arg("fs"), py::arg("depth_s"), py::arg("rate_hz"));

  m.def(
      "generate",
      [](const std::string& config_json) {
        const auto g = generate_signals(parse_run_config(config_json));
        return py::make_tuple(to_array(g.mix), to_list(g.channels), manifest_to_json(g.manifest));
      },
      py::arg("config_json") = "{}", "Returns (mix, per-channel signals, manifest JSON).");
  m.def("measure", [](const Array& recording, const std::string& manifest_json) {
    const auto man = parse_manifest(manifest_json);
    return measurement_dict(measure_recording(to_signal(recording, man.fs), man));
  }, py::arg("recording"), py::arg("manifest_json"));
  m.def(
      "align",
      [](const Array& recording, const std::string& manifest_json, double c_mag) {
        const auto man = parse_manifest(manifest_json);
        const auto a = align_recording(to_signal(recording, man.fs), man, c_mag);
        return py::make_tuple(to_array(a.aligned), to_array(a.map.t_ad()), to_array(a.map.t_da()), a.map.slope());
      },
      py::arg("recording"), py::arg("manifest_json"), py::arg("c_mag") = 1.0,
      "Returns (aligned recording, t_AD, t_DA, warp slope).");

  m.def("selftest", [] {
    py::list out;
    for (const auto& r : acceptance::run_all()) {
      py::dict d;
      d["id"] = r.id;
      d["name"] = r.name;
      d["pass"] = r.pass;
      d["known_unattainable"] = acceptance::known_unattainable(r.id);
      d["detail"] = r.detail;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  });
}
