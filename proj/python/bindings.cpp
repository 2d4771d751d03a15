#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "dsvit/errors.hpp"
#include "dsvit/model/encoder.hpp"
#include "dsvit/synthvol/dataset.hpp"
#include "dsvit/synthvol/generator.hpp"
#include "dsvit/trainer/trainer.hpp"

namespace py = pybind11;
using namespace dsvit;

namespace {

template <typename V>
py::array_t<V> to_array(const synth::Grid3<V>& g) {
  py::array_t<V> a({g.dims.h, g.dims.w, g.dims.l});
  std::copy(g.values.begin(), g.values.end(), a.mutable_data());
  return a;
}

template <typename V>
synth::Grid3<V> from_array(const py::array_t<V, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw ShapeError("expected a 3-D array");
  synth::Grid3<V> g(synth::Dims{static_cast<std::uint32_t>(a.shape(0)), static_cast<std::uint32_t>(a.shape(1)),
                                static_cast<std::uint32_t>(a.shape(2))});
  std::copy(a.data(), a.data() + a.size(), g.values.begin());
  return g;
}

nlohmann::json parse(const std::string& text) { return nlohmann::json::parse(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dual-stream vision transformer on synthetic brain volumes";

  static py::exception<Error> dsvit_error(m, "DsvitError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = dsvit_error;
      py::object instance = err(e.what());
      instance.attr("exit_code") = static_cast<int>(e.code());
      PyErr_SetObject(dsvit_error.ptr(), instance.ptr());
    }
  });

  m.def(
      "generate_subject",
      [](const std::string& spec_json, std::uint64_t subject_seed) {
        const auto spec = parse(spec_json).get<synth::GeneratorSpec>();
        spec.validate();
        const synth::Subject s = synth::generate_subject(spec, subject_seed);
        return py::make_tuple(to_array(s.volume), to_array(s.seg), s.label());
      },
      py::arg("spec_json"), py::arg("subject_seed"));

  m.def(
      "token_count",
      [](std::array<std::uint32_t, 3> dims, std::uint32_t patch_size, std::uint32_t slice_stride) {
        const synth::Dims d{dims[0], dims[1], dims[2]};
        const slicer::SlicerConfig cfg{patch_size, slice_stride};
        slicer::check_geometry(d, cfg);
        return slicer::total_tokens(d, cfg);
      },
      py::arg("dims"), py::arg("patch_size") = 8, py::arg("slice_stride") = 4);

  m.def(
      "generate_dataset",
      [](const std::string& spec_json, const std::string& out_dir, bool longitudinal) {
        const auto spec = parse(spec_json).get<synth::GeneratorSpec>();
        spec.validate();
        return synth::save_dataset(synth::generate_dataset(spec, longitudinal), out_dir);
      },
      py::arg("spec_json"), py::arg("out_dir"), py::arg("longitudinal") = false);

  m.def(
      "read_manifest", [](const std::string& dir) { return synth::read_manifest(dir).dump(); }, py::arg("dir"));

  m.def(
      "ablation_suite",
      [](const std::string& data_dir, const std::string& config_json) {
        const auto cfg = parse(config_json).get<train::TrainConfig>();
        const auto data = synth::load_dataset(data_dir);
        py::gil_scoped_release release;
        return nlohmann::json(train::ablation_suite(data, cfg)).dump();
      },
      py::arg("data_dir"), py::arg("config_json"));

  m.def(
      "infer",
      [](const std::string& checkpoint, const py::array_t<float, py::array::c_style | py::array::forcecast>& volume,
         const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& seg) {
        const model::Checkpoint ck = model::load_checkpoint(checkpoint);
        const train::TrainConfig cfg = train::checkpoint_config(ck);
        model::EncoderConfig enc = cfg.encoder;
        model::apply_ablation(enc, cfg.ablation);
        const auto sample = slicer::tokenize(from_array<float>(volume), from_array<std::uint16_t>(seg), enc.slicing);
        const model::ScanFeature f = model::infer(train::backbone_params(ck.params), enc, sample);
        return py::make_tuple(f.logits, f.m);
      },
      py::arg("checkpoint"), py::arg("volume"), py::arg("seg"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "dsvit");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
