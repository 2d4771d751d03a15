#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsvit/synthvol/generator.hpp"

namespace dsvit::synth {

struct LabeledScan {
  Volume volume;
  SegVolume seg;
  double months = 0.0;
  double delta = 0.0;
  Diagnosis diagnosis = Diagnosis::kNC;
};

// One subject as the trainer sees it: one scan for the single-timepoint task,
// T scans for the longitudinal task. `label` is 1 for the positive class
// (AD, or at-risk) regardless of how the manifest encodes labels.
struct SampleRecord {
  std::string subject_id;
  Split split = Split::kTrain;
  int label = 0;
  std::vector<LabeledScan> scans;
};

struct Dataset {
  GeneratorSpec spec;
  bool longitudinal = false;
  std::vector<SampleRecord> samples;

  std::vector<const SampleRecord*> split(Split s) const;
};

Dataset generate_dataset(const GeneratorSpec& spec, bool longitudinal);

// Hash over (subject id, split, label) in order; equal for datasets with
// identical splits.
std::string split_fingerprint(const Dataset& d);
// Number of subject ids that appear in more than one split.
std::size_t split_leakage(const Dataset& d);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

inline constexpr int kManifestVersion = 1;

// Writes `<dir>/volumes/*.dsv` and `<dir>/manifest.json`; returns the
// manifest's content hash. Output is byte-identical for identical inputs.
std::string save_dataset(const Dataset& d, const std::filesystem::path& dir);
// Reads the manifest, verifies file hashes and loads every volume.
Dataset load_dataset(const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);
// SHA-256 of the manifest with its "content_hash" field removed.
std::string manifest_content_hash(const nlohmann::json& manifest);

}  // namespace dsvit::synth
