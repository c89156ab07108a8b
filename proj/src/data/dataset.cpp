#include "hmc/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hmc/core/error.hpp"
#include "hmc/core/rng.hpp"
#include "hmc/data/image.hpp"

namespace hmc::data {

Dataset::Dataset(std::vector<SampleRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void Dataset::add(SampleRecord record) {
  counts_[index_of(record.label)] += 1;
  records_.push_back(std::move(record));
}

bool Dataset::materialized() const {
  return std::all_of(records_.begin(), records_.end(), [](const SampleRecord& r) { return r.pixels.has_value(); });
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("manifest " + path.string() + " is empty");
  if (split_csv(trim(line)) != std::vector<std::string>{"image", "patient_id", "view", "label"})
    throw ValidationError("manifest header must be 'image,patient_id,view,label'");

  Dataset ds;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++row;
    const std::string where = "manifest row " + std::to_string(row) + ": ";
    auto fields = split_csv(line);
    if (fields.size() != 4) throw ValidationError(where + "expected 4 fields, got " + std::to_string(fields.size()));
    SampleRecord r;
    try {
      r.label = parse_subtype(fields[3]);
      r.view = parse_view(fields[2]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (fields[0].empty() || fields[1].empty()) throw ValidationError(where + "image and patient_id are required");
    std::filesystem::path image = fields[0];
    if (image.is_relative()) image = base / image;
    r.image = image.lexically_normal().string();
    r.patient_id = fields[1];
    if (!seen.emplace(r.patient_id, r.image).second)
      throw ValidationError(where + "duplicate (patient_id, image) pair " + r.patient_id + ", " + fields[0]);
    try {
      read_image(r.image);
    } catch (const std::exception& e) {
      throw IoError(where + e.what());
    }
    ds.add(std::move(r));
  }
  return ds;
}

void write_manifest(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  out << "image,patient_id,view,label\n";
  for (const auto& r : dataset.records()) {
    std::filesystem::path image(r.image);
    std::string rel = base.empty() ? image.string() : image.lexically_relative(base).string();
    if (rel.empty()) rel = image.string();
    out << rel << ',' << r.patient_id << ',' << to_string(r.view) << ',' << to_string(r.label) << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

Dataset materialize(const Dataset& dataset, std::size_t height, std::size_t width) {
  Dataset out;
  for (const auto& r : dataset.records()) {
    SampleRecord copy = r;
    if (!copy.pixels) copy.pixels = preprocess(read_image(copy.image), height, width);
    out.add(std::move(copy));
  }
  return out;
}

std::string_view to_string(Grouping grouping) {
  return grouping == Grouping::by_patient ? "by_patient" : "by_image";
}

Grouping parse_grouping(std::string_view text) {
  if (text == "by_patient") return Grouping::by_patient;
  if (text == "by_image") return Grouping::by_image;
  throw ValidationError("unknown split grouping '" + std::string(text) + "'");
}

SplitResult split(const Dataset& dataset, const SplitOptions& options) {
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  for (const auto& r : dataset.records())
    if (r.synthetic || r.duplicate)
      throw ValidationError("split must run before oversampling (found generated record " + r.image + ")");

  // Units in order of first appearance; a unit's class is that of its first record.
  std::vector<std::vector<std::size_t>> units;
  std::vector<SubtypeLabel> unit_label;
  std::map<std::string, std::size_t> by_patient;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    if (options.grouping == Grouping::by_patient) {
      auto [it, fresh] = by_patient.emplace(r.patient_id, units.size());
      if (!fresh) {
        units[it->second].push_back(i);
        continue;
      }
    }
    units.push_back({i});
    unit_label.push_back(r.label);
  }

  std::array<std::vector<std::size_t>, kNumSubtypes> per_class;
  for (std::size_t u = 0; u < units.size(); ++u) per_class[index_of(unit_label[u])].push_back(u);

  const double f = options.train_fraction;
  const auto total_train = static_cast<std::size_t>(std::lround(f * static_cast<double>(units.size())));
  std::array<std::size_t, kNumSubtypes> quota{}, lower{}, upper{};
  std::array<double, kNumSubtypes> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumSubtypes; ++c) {
    const std::size_t n = per_class[c].size();
    lower[c] = n >= 2 ? 1 : 0;
    upper[c] = n >= 2 ? n - 1 : n;
    const double ideal = f * static_cast<double>(n);
    remainder[c] = ideal - std::floor(ideal);
    quota[c] = std::clamp(static_cast<std::size_t>(std::floor(ideal)), lower[c], upper[c]);
    assigned += quota[c];
  }
  // Largest remainders gain units first and lose them last, within the bounds.
  std::array<std::size_t, kNumSubtypes> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (bool moved = true; assigned < total_train && moved;) {
    moved = false;
    for (std::size_t c : order)
      if (assigned < total_train && quota[c] < upper[c]) {
        ++quota[c];
        ++assigned;
        moved = true;
      }
  }
  for (bool moved = true; assigned > total_train && moved;) {
    moved = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (assigned > total_train && quota[*it] > lower[*it]) {
        --quota[*it];
        --assigned;
        moved = true;
      }
  }

  SplitResult result;
  Rng rng(derive_seed(options.seed, "split"));
  std::vector<bool> in_train(dataset.size(), false);
  for (std::size_t c = 0; c < kNumSubtypes; ++c) {
    auto& members = per_class[c];
    const std::size_t n = members.size();
    if (n == 0) continue;
    if (n < 2)
      result.warnings.push_back("class " + std::string(to_string(subtype_at(c))) +
                                " has fewer than 2 units and cannot appear on both sides of the split");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < quota[c] && k < n; ++k)
      for (std::size_t i : units[members[k]]) in_train[i] = true;
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) (in_train[i] ? result.train : result.test).add(dataset[i]);
  return result;
}

}  // namespace hmc::data
