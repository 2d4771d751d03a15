#include "dsvit/synthvol/dataset.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <set>

#include "dsvit/synthvol/dsv_io.hpp"

namespace dsvit::synth {

std::vector<const SampleRecord*> Dataset::split(Split s) const {
  std::vector<const SampleRecord*> out;
  for (const auto& r : samples) {
    if (r.split == s) out.push_back(&r);
  }
  return out;
}

Dataset generate_dataset(const GeneratorSpec& spec, bool longitudinal) {
  Dataset d;
  d.spec = spec;
  d.longitudinal = longitudinal;
  for (const CohortEntry& e : plan_cohort(spec, longitudinal)) {
    SampleRecord r;
    r.subject_id = subject_id(e.index);
    r.split = e.split;
    r.label = e.label;
    if (longitudinal) {
      LongitudinalRecord rec = generate_longitudinal(spec, e.seed, spec.timepoints);
      for (Scan& s : rec.scans) {
        r.scans.push_back({std::move(s.volume), std::move(s.seg), s.months, s.delta, s.diagnosis});
      }
    } else {
      Subject s = generate_subject(spec, e.seed);
      r.scans.push_back({std::move(s.volume), std::move(s.seg), 0.0, s.delta, s.diagnosis});
    }
    d.samples.push_back(std::move(r));
  }
  return d;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ExitCode::kInvalidInput, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string split_fingerprint(const Dataset& d) {
  std::string buf;
  for (const auto& r : d.samples) {
    buf += r.subject_id + ":" + to_string(r.split) + ":" + std::to_string(r.label) + ";";
  }
  return sha256_hex(buf);
}

std::size_t split_leakage(const Dataset& d) {
  std::map<std::string, std::set<Split>> seen;
  for (const auto& r : d.samples) seen[r.subject_id].insert(r.split);
  std::size_t leaked = 0;
  for (const auto& [id, splits] : seen) {
    if (splits.size() > 1) ++leaked;
  }
  return leaked;
}

namespace {

std::string positive_name(bool longitudinal) { return longitudinal ? "at_risk" : "AD"; }
std::string negative_name(bool longitudinal) { return longitudinal ? "safe" : "NC"; }

}  // namespace

std::string manifest_content_hash(const nlohmann::json& manifest) {
  nlohmann::json body = manifest;
  body.erase("content_hash");
  return sha256_hex(body.dump());
}

std::string save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "volumes", ec);
  if (ec) throw IoError("cannot create " + (dir / "volumes").string() + ": " + ec.message());

  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& r : d.samples) {
    nlohmann::json scans = nlohmann::json::array();
    for (std::size_t t = 0; t < r.scans.size(); ++t) {
      const auto& s = r.scans[t];
      const std::string stem = r.subject_id + "_t" + std::to_string(t + 1);
      const fs::path img = fs::path("volumes") / (stem + "_img.dsv");
      const fs::path seg = fs::path("volumes") / (stem + "_seg.dsv");
      save_volume(dir / img, s.volume);
      save_volume(dir / seg, s.seg);
      scans.push_back({{"image", img.generic_string()},
                       {"labels", seg.generic_string()},
                       {"image_sha256", sha256_file(dir / img)},
                       {"labels_sha256", sha256_file(dir / seg)},
                       {"months", s.months},
                       {"delta", s.delta},
                       {"diagnosis", to_string(s.diagnosis)}});
    }
    const std::string name = r.label ? positive_name(d.longitudinal) : negative_name(d.longitudinal);
    subjects.push_back({{"id", r.subject_id},
                        {"split", to_string(r.split)},
                        {"label_name", name},
                        {"label", r.label},
                        {"scans", std::move(scans)}});
  }
  nlohmann::json manifest = {
      {"format", "dsvit-manifest"},
      {"version", kManifestVersion},
      {"task", d.longitudinal ? "longitudinal" : "single_timepoint"},
      {"generator", d.spec},
      {"label_encoding",
       {{negative_name(d.longitudinal), 0}, {positive_name(d.longitudinal), 1}}},
      {"positive_class", positive_name(d.longitudinal)},
      {"split_fingerprint", split_fingerprint(d)},
      {"subjects", std::move(subjects)},
  };
  const std::string hash = manifest_content_hash(manifest);
  manifest["content_hash"] = hash;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest");
  return hash;
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "dsvit-manifest") throw FormatError("not a dsvit manifest");
  if (j.value("version", 0) != kManifestVersion) {
    throw FormatError("manifest version " + std::to_string(j.value("version", 0)) +
                      " is not supported");
  }
  if (j.contains("content_hash") && j["content_hash"] != manifest_content_hash(j)) {
    throw InvariantViolation("manifest content hash mismatch in " + path.string());
  }
  return j;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json m = read_manifest(dir);
  Dataset d;
  try {
    d.spec = m.at("generator").get<GeneratorSpec>();
    d.longitudinal = m.at("task").get<std::string>() == "longitudinal";
    const std::string positive = positive_name(d.longitudinal);
    const std::string negative = negative_name(d.longitudinal);
    const auto& encoding = m.at("label_encoding");
    for (const auto& sj : m.at("subjects")) {
      SampleRecord r;
      r.subject_id = sj.at("id").get<std::string>();
      r.split = parse_split(sj.at("split").get<std::string>());
      // Names decide the positive class; the integer must agree with the encoding.
      const std::string name = sj.at("label_name").get<std::string>();
      if (name != positive && name != negative) throw FormatError("unknown label '" + name + "'");
      if (sj.at("label").get<int>() != encoding.at(name).get<int>()) {
        throw InvariantViolation("label of " + r.subject_id + " disagrees with label_encoding");
      }
      r.label = name == positive ? 1 : 0;
      for (const auto& sc : sj.at("scans")) {
        LabeledScan s;
        const auto img = dir / sc.at("image").get<std::string>();
        const auto seg = dir / sc.at("labels").get<std::string>();
        if (sha256_file(img) != sc.at("image_sha256").get<std::string>() ||
            sha256_file(seg) != sc.at("labels_sha256").get<std::string>()) {
          throw InvariantViolation("content hash mismatch for scans of " + r.subject_id);
        }
        s.volume = load_intensity(img);
        s.seg = load_labels(seg);
        if (!(s.volume.dims == d.spec.dims) || !(s.seg.dims == d.spec.dims)) {
          throw FormatError("volume dims of " + r.subject_id + " differ from the generator spec");
        }
        s.months = sc.at("months").get<double>();
        s.delta = sc.at("delta").get<double>();
        const std::string dx = sc.at("diagnosis").get<std::string>();
        s.diagnosis = dx == "AD" ? Diagnosis::kAD : dx == "MCI" ? Diagnosis::kMCI : Diagnosis::kNC;
        r.scans.push_back(std::move(s));
      }
      if (r.scans.empty()) throw FormatError("subject " + r.subject_id + " has no scans");
      d.samples.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (split_leakage(d) != 0) throw InvariantViolation("subject appears in more than one split");
  return d;
}

}  // namespace dsvit::synth
