#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tightfb/errors.hpp"
#include "tightfb/filterbank.hpp"
#include "tightfb/frame.hpp"
#include "tightfb/montecarlo.hpp"
#include "tightfb/objectives.hpp"
#include "tightfb/trainer.hpp"

namespace py = pybind11;
using namespace tightfb;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

Signal to_signal(const RealArray& x, int sample_rate) {
  if (x.ndim() != 1) throw InvalidArgument("expected a 1-D signal");
  return Signal(RealVec(x.data(), x.data() + x.size()), sample_rate);
}

RealArray to_array(std::span<const double> v) {
  RealArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ComplexArray to_array(std::span<const Complex> v) {
  ComplexArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Filterbank bank_from(const std::vector<ComplexArray>& filters, std::size_t hop, const std::string& kind) {
  std::vector<ComplexVec> taps;
  for (const ComplexArray& f : filters) {
    if (f.ndim() != 1) throw InvalidArgument("each filter must be 1-D");
    taps.emplace_back(f.data(), f.data() + f.size());
  }
  return Filterbank(std::move(taps), hop, kind_from_string(kind));
}

// frames x channels complex matrix
ComplexArray coefficients_array(const Coefficients& c) {
  ComplexArray out({static_cast<py::ssize_t>(c.frames()), static_cast<py::ssize_t>(c.channels())});
  std::copy(c.values().begin(), c.values().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_tightfb, m) {
  m.doc() = "Frame-theoretic audio filterbanks";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

  py::class_<Filterbank>(m, "Filterbank")
      .def(py::init(&bank_from), py::arg("filters"), py::arg("hop") = 1, py::arg("kind") = "random")
      .def_property_readonly("filters",
                             [](const Filterbank& fb) {
                               std::vector<ComplexArray> out;
                               for (const ComplexVec& f : fb.filters()) out.push_back(to_array(f));
                               return out;
                             })
      .def_property_readonly("hop", &Filterbank::hop)
      .def_property_readonly("kind", [](const Filterbank& fb) { return to_string(fb.kind()); })
      .def_property_readonly("max_length", &Filterbank::max_length)
      .def_property_readonly("metadata_json", [](const Filterbank& fb) { return fb.metadata().dump(); })
      .def("is_real", &Filterbank::is_real)
      .def("with_hop", &Filterbank::with_hop)
      .def("__len__", &Filterbank::size)
      .def("__eq__", [](const Filterbank& a, const Filterbank& b) { return a == b; })
      .def("__repr__", [](const Filterbank& fb) {
        return "<Filterbank " + to_string(fb.kind()) + " J=" + std::to_string(fb.size()) +
               " T=" + std::to_string(fb.max_length()) + " hop=" + std::to_string(fb.hop()) + ">";
      });

  py::class_<AuditorySpec>(m, "AuditorySpec")
      .def(py::init<>())
      .def_readwrite("channels", &AuditorySpec::channels)
      .def_readwrite("sample_rate", &AuditorySpec::sample_rate)
      .def_readwrite("f_min", &AuditorySpec::f_min)
      .def_readwrite("f_max", &AuditorySpec::f_max)
      .def_readwrite("filter_length", &AuditorySpec::filter_length)
      .def_readwrite("hop", &AuditorySpec::hop)
      .def_readwrite("tight_length", &AuditorySpec::tight_length);

  py::class_<FrameBounds>(m, "FrameBounds")
      .def_readonly("A", &FrameBounds::A)
      .def_readonly("B", &FrameBounds::B)
      .def_readonly("kappa", &FrameBounds::kappa)
      .def_property_readonly("spectrum", [](const FrameBounds& b) { return to_array(b.spectrum); })
      .def("is_frame", &FrameBounds::is_frame);

  py::class_<TightnessEstimate>(m, "TightnessEstimate")
      .def_readonly("mean_ratio", &TightnessEstimate::mean_ratio)
      .def_readonly("stderr", &TightnessEstimate::stderr_)
      .def_readonly("trials", &TightnessEstimate::trials)
      .def_readonly("expected_constant", &TightnessEstimate::expected_constant)
      .def("within", &TightnessEstimate::within);

  m.def("make_stft", &make_stft, py::arg("num_channels"), py::arg("window_length"), py::arg("hop"));
  m.def(
      "make_random",
      [](std::size_t J, std::size_t T, std::optional<double> sigma2, std::size_t hop, std::uint64_t seed) {
        return sigma2 ? make_random(J, T, *sigma2, hop, seed) : make_random(J, T, hop, seed);
      },
      py::arg("channels"), py::arg("length"), py::arg("sigma2") = py::none(), py::arg("hop") = 1,
      py::arg("seed") = 0);
  m.def(
      "make_auditory",
      [](std::size_t channels, int sample_rate, double f_min, std::optional<double> f_max,
         std::size_t filter_length, std::size_t hop, std::size_t tight_length) {
        AuditorySpec spec;
        spec.channels = channels;
        spec.sample_rate = sample_rate;
        spec.f_min = f_min;
        spec.f_max = f_max.value_or(0.5 * sample_rate);
        spec.filter_length = filter_length;
        spec.hop = hop;
        spec.tight_length = tight_length;
        return make_auditory(spec);
      },
      py::arg("channels") = 256, py::arg("sample_rate") = 16000, py::arg("f_min") = 0.0,
      py::arg("f_max") = py::none(), py::arg("filter_length") = 512, py::arg("hop") = 128,
      py::arg("tight_length") = 0);
  m.def("make_delta", &make_delta, py::arg("channels"), py::arg("hop") = 1);
  m.def(
      "compose_hybrid",
      [](const Filterbank& fixed, const Filterbank& trainable, std::optional<std::size_t> hop,
         std::size_t wrap_length) { return compose_hybrid(fixed, trainable, hop, wrap_length); },
      py::arg("fixed"), py::arg("trainable"), py::arg("hop") = py::none(), py::arg("wrap_length") = 0);
  m.def("canonical_tight", &canonical_tight, py::arg("fb"), py::arg("n"));
  m.def("load", [](const std::string& p) { return load(p); }, py::arg("path"));
  m.def("save", [](const Filterbank& fb, const std::string& p) { save(fb, p); }, py::arg("fb"),
        py::arg("path"));

  m.def("frame_bounds_fft", py::overload_cast<const Filterbank&, std::size_t>(&frame_bounds_fft),
        py::arg("fb"), py::arg("n"));
  m.def("frame_bounds_exact", &frame_bounds_exact, py::arg("fb"), py::arg("n"), py::arg("hop"));

  m.def(
      "analyze",
      [](const Filterbank& fb, const RealArray& x) {
        const Signal s = to_signal(x, 16000);
        return coefficients_array(analyze(fb, s));
      },
      py::arg("fb"), py::arg("x"), "Coefficients as a (frames, channels) complex array.");
  m.def(
      "synthesize",
      [](const Filterbank& fb, const ComplexArray& c, std::size_t n) {
        if (c.ndim() != 2) throw InvalidArgument("coefficients must be (frames, channels)");
        Coefficients coeffs(static_cast<std::size_t>(c.shape(0)), static_cast<std::size_t>(c.shape(1)),
                            fb.hop(), n);
        std::copy(c.data(), c.data() + c.size(), coeffs.values().begin());
        return to_array(synthesize_samples(fb, coeffs));
      },
      py::arg("fb"), py::arg("coefficients"), py::arg("n"));
  m.def(
      "reconstruct",
      [](const Filterbank& fb, const RealArray& x) {
        const Reconstruction r = reconstruct(fb, to_signal(x, 16000));
        return py::make_tuple(to_array(r.signal.samples()), r.recon_error);
      },
      py::arg("fb"), py::arg("x"), "Returns (x_hat, relative error).");

  m.def(
      "mcs",
      [](const RealArray& x, const RealArray& y, const Filterbank& fb, double c, double gamma) {
        return mcs(to_signal(x, 16000), to_signal(y, 16000), fb, MCSParams{c, gamma, 0.0});
      },
      py::arg("x"), py::arg("x_tilde"), py::arg("fb"), py::arg("c") = 0.3, py::arg("gamma") = 0.3);
  m.def(
      "mcs_beta",
      [](const RealArray& x, const RealArray& y, const Filterbank& fb, double c, double gamma, double beta,
         std::size_t n) {
        return mcs_beta(to_signal(x, 16000), to_signal(y, 16000), fb, MCSParams{c, gamma, beta}, n);
      },
      py::arg("x"), py::arg("x_tilde"), py::arg("fb"), py::arg("c") = 0.3, py::arg("gamma") = 0.3,
      py::arg("beta") = 1e-5, py::arg("n"));
  m.def(
      "si_sdr",
      [](const RealArray& ref, const RealArray& est) {
        return si_sdr(std::span<const double>(ref.data(), ref.size()),
                      std::span<const double>(est.data(), est.size()));
      },
      py::arg("reference"), py::arg("estimate"));

  m.def(
      "ideal_ratio_mask",
      [](const RealArray& clean, const RealArray& noisy, const Filterbank& fb) {
        return to_array(ideal_ratio_mask(to_signal(clean, 16000), to_signal(noisy, 16000), fb));
      },
      py::arg("clean"), py::arg("noisy"), py::arg("fb"));
  m.def(
      "enhance",
      [](const Filterbank& fb, const RealArray& noisy, const RealArray& mask) {
        const MaskArray mk(mask.data(), mask.data() + mask.size());
        return to_array(enhance(fb, to_signal(noisy, 16000), mk).samples());
      },
      py::arg("fb"), py::arg("noisy"), py::arg("mask"));

  m.def(
      "tighten",
      [](const Filterbank& fb, std::size_t n, std::size_t steps, double lr, std::string optimizer,
         double weight_decay) {
        TrainConfig cfg;
        cfg.steps = steps;
        cfg.learning_rate = lr;
        cfg.weight_decay = weight_decay;
        if (optimizer == "sgd") {
          cfg.optimizer = OptimizerKind::kPlainSgd;
        } else if (optimizer != "adam") {
          throw InvalidArgument("optimizer must be 'adam' or 'sgd'");
        }
        TrainReport r = tighten(fb, std::vector<bool>(fb.size(), true), n, cfg);
        std::vector<double> kappas;
        for (const TraceRow& row : r.trace) kappas.push_back(row.kappa);
        return py::make_tuple(r.final_fb, to_array(kappas));
      },
      py::arg("fb"), py::arg("n"), py::arg("steps") = 500, py::arg("lr") = 1e-3,
      py::arg("optimizer") = "adam", py::arg("weight_decay") = 0.0,
      "Returns (tightened filterbank, kappa per step).");

  m.def("verify_random_tightness", &verify_random_tightness, py::arg("channels"), py::arg("length"),
        py::arg("sigma2"), py::arg("n"), py::arg("trials") = 10000, py::arg("seed") = 0);
  m.def("verify_hybrid_tightness", &verify_hybrid_tightness, py::arg("fixed"), py::arg("length"),
        py::arg("sigma2"), py::arg("n"), py::arg("trials") = 10000, py::arg("seed") = 0);
}
