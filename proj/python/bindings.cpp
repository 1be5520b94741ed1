#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lrd/cli.hpp"
#include "lrd/errors.hpp"
#include "lrd/image.hpp"
#include "lrd/low_rank.hpp"
#include "lrd/noise_estimation.hpp"
#include "lrd/pipeline.hpp"

namespace py = pybind11;
using namespace lrd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 2) throw DimensionMismatch("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return Image(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Image& img) {
  Array out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

py::dict state_dict(const NoiseState& s) {
  py::dict d;
  d["iteration"] = s.iteration;
  d["sigma_n"] = s.sigma_n;
  d["sigma_flt"] = s.sigma_flt;
  d["sigma_res"] = s.sigma_res;
  d["sigma_geom"] = s.sigma_geom;
  d["sigma_res_geom"] = s.sigma_res_geom;
  d["sigma_hat"] = s.sigma_hat;
  d["gamma"] = s.gamma;
  d["alpha"] = s.alpha;
  return d;
}

Mode mode_from(const std::string& name) {
  auto m = parse_mode(name);
  if (!m) throw InvalidArgument("unknown mode '" + name + "'");
  return *m;
}

}  // namespace

PYBIND11_MODULE(_lrdenoise, m) {
  m.doc() = "Patch-based low-rank image denoising";

  py::register_exception<Error>(m, "LrdError", PyExc_ValueError);

  py::class_<DenoiseConfig>(m, "DenoiseConfig")
      .def(py::init([](double sigma, const std::string& mode, bool pseudo_periodic) {
             return parameter_defaults(sigma, mode_from(mode), pseudo_periodic);
           }),
           py::arg("sigma"), py::arg("mode") = "gwnnm", py::arg("pseudo_periodic") = false)
      .def_readwrite("sigma_n", &DenoiseConfig::sigma_n)
      .def_property(
          "mode", [](const DenoiseConfig& c) { return std::string(mode_name(c.mode)); },
          [](DenoiseConfig& c, const std::string& s) { c.mode = mode_from(s); })
      .def_readwrite("iterations", &DenoiseConfig::iterations)
      .def_readwrite("delta", &DenoiseConfig::delta)
      .def_readwrite("eta", &DenoiseConfig::eta)
      .def_readwrite("gamma", &DenoiseConfig::gamma)
      .def_readwrite("alpha_override", &DenoiseConfig::alpha_override)
      .def_readwrite("tau", &DenoiseConfig::tau)
      .def_readwrite("c", &DenoiseConfig::c)
      .def_readwrite("eps", &DenoiseConfig::eps)
      .def_property(
          "patch_size", [](const DenoiseConfig& c) { return c.patch.size; },
          [](DenoiseConfig& c, int v) { c.patch.size = v; })
      .def_property(
          "stride", [](const DenoiseConfig& c) { return c.patch.stride; },
          [](DenoiseConfig& c, int v) { c.patch.stride = v; })
      .def_property(
          "patch_count", [](const DenoiseConfig& c) { return c.patch.count; },
          [](DenoiseConfig& c, int v) { c.patch.count = v; })
      .def_property(
          "window", [](const DenoiseConfig& c) { return c.patch.window; },
          [](DenoiseConfig& c, int v) { c.patch.window = v; })
      .def_readwrite("seed", &DenoiseConfig::seed)
      .def_readwrite("clip_input", &DenoiseConfig::clip_input)
      .def_readwrite("threads", &DenoiseConfig::threads)
      .def("alpha", &DenoiseConfig::alpha)
      .def("validate", &DenoiseConfig::validate);

  m.def(
      "denoise",
      [](const Array& noisy, const DenoiseConfig& config) {
        DenoiseResult r;
        const Image img = to_image(noisy);
        {
          py::gil_scoped_release release;
          r = denoise(img, config);
        }
        py::list trace;
        for (const auto& s : r.trace) trace.append(state_dict(s));
        return py::make_tuple(to_array(r.image), to_array(r.low), to_array(r.high), trace);
      },
      py::arg("noisy"), py::arg("config"),
      "Returns (image, low, high, trace); low/high are the mean-free spectrum components.");

  m.def("load_pgm", [](const std::string& path) { return to_array(load_image(path)); });
  m.def("save_pgm", [](const std::string& path, const Array& a) { save_image(to_image(a), path); });
  m.def(
      "add_gaussian_noise",
      [](const Array& a, double sigma, std::uint64_t seed) {
        return to_array(add_gaussian_noise(to_image(a), sigma, seed));
      },
      py::arg("image"), py::arg("sigma"), py::arg("seed") = 0);
  m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
  m.def(
      "estimate_noise",
      [](const Array& a, int patch_size, std::uint64_t seed) {
        const auto e = estimate_weak_texture(to_image(a), patch_size, seed);
        return py::make_tuple(e.sigma, e.all_patch_sigma);
      },
      py::arg("image"), py::arg("patch_size") = 7, py::arg("seed") = 0);

  m.def("svd", [](const Eigen::MatrixXd& a) {
    const SvdFactors f = svd(a);
    return py::make_tuple(f.u, f.sigma, f.v);
  });
  m.def("nnm_shrink", &nnm_shrink);
  m.def("adjust_singulars", &adjust_singulars, py::arg("sigma"), py::arg("patch_count"),
        py::arg("noise_sigma"));
  m.def("wnnm_weights", &wnnm_weights, py::arg("adjusted"), py::arg("c"), py::arg("patch_count"),
        py::arg("eps") = 1e-16);
  m.def("wnnm_shrink", &wnnm_shrink);
  m.def("split_spectrum", [](const Eigen::VectorXd& v, double tau) {
    const auto s = split_spectrum(v, tau);
    return py::make_tuple(s.high, s.low);
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "Runs one lrdenoise command; returns (exit_code, stdout, stderr).");
}
