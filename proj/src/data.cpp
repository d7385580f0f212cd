#include "dppce/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dppce/errors.hpp"

namespace dppce {

namespace {

constexpr const char* kSplitNames[] = {"train", "val", "test"};

Split split_from_name(const std::string& name, const std::string& where) {
  for (int s = 0; s < 3; ++s)
    if (name == kSplitNames[s]) return static_cast<Split>(s);
  throw InputError(where + ": unknown split label '" + name + "'");
}

void check_fractions(const SplitFractions& f) {
  if (f.train < 0 || f.validation < 0 || f.test < 0 ||
      std::abs(f.train + f.validation + f.test - 1.0) > 1e-9)
    throw InputError("split fractions must be nonnegative and sum to 1");
  if (!(f.train > 0)) throw InputError("train fraction must be positive");
}

// Raw baskets (original ids, already deduplicated/filtered/clipped) into a
// Corpus: dense catalog, seeded split assignment, train stats.
Corpus assemble(std::vector<std::vector<std::int64_t>> raw, Rng& rng,
                const SplitFractions& fractions, Provenance provenance) {
  check_fractions(fractions);
  if (raw.empty()) throw InputError(provenance.source + ": no usable baskets");

  Corpus corpus;
  corpus.provenance = std::move(provenance);

  std::set<std::int64_t> ids;
  for (const auto& b : raw) ids.insert(b.begin(), b.end());
  if (ids.size() > static_cast<std::size_t>(INT32_MAX))
    throw InputError("catalog overflow");
  corpus.catalog.assign(ids.begin(), ids.end());
  for (std::size_t d = 0; d < corpus.catalog.size(); ++d)
    corpus.to_dense.emplace(corpus.catalog[d], static_cast<ItemIndex>(d));

  corpus.baskets.reserve(raw.size());
  for (const auto& b : raw) {
    std::vector<ItemIndex> dense(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
      dense[i] = corpus.to_dense.at(b[i]);
    corpus.baskets.emplace_back(std::move(dense));
  }

  const std::size_t n = corpus.baskets.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(fractions.train * n));
  const auto n_val =
      static_cast<std::size_t>(std::llround(fractions.validation * n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  corpus.splits.assign(n, Split::kTest);
  for (std::size_t i = 0; i < n && i < n_train; ++i)
    corpus.splits[order[i]] = Split::kTrain;
  for (std::size_t i = n_train; i < n && i < n_train + n_val; ++i)
    corpus.splits[order[i]] = Split::kValidation;

  corpus.stats =
      compute_stats(corpus.split_baskets(Split::kTrain), corpus.num_items());
  return corpus;
}

}  // namespace

std::vector<std::size_t> Corpus::split_indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < baskets.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

std::vector<Basket> Corpus::split_baskets(Split split) const {
  std::vector<Basket> out;
  for (std::size_t i = 0; i < baskets.size(); ++i)
    if (splits[i] == split) out.push_back(baskets[i]);
  return out;
}

std::size_t Corpus::max_basket_size() const {
  std::size_t best = 0;
  for (const Basket& b : baskets) best = std::max(best, b.size());
  return best;
}

Corpus load_transactions(const std::string& path, std::size_t max_size,
                         std::size_t min_size, Rng& rng,
                         const SplitFractions& fractions) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  Provenance prov;
  prov.source = path;
  std::set<std::int64_t> raw_ids;
  std::vector<std::vector<std::int64_t>> kept;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::int64_t> items;
    std::int64_t id;
    while (ss >> id) {
      if (id < 0)
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": negative item id");
      items.push_back(id);
    }
    if (!ss.eof())
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": unparseable line");
    if (items.empty()) continue;  // blank line

    ++prov.raw_baskets;
    raw_ids.insert(items.begin(), items.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());

    if (items.size() < min_size) {
      ++prov.dropped_small;
      continue;
    }
    if (items.size() > max_size) {
      rng.shuffle(items);
      items.resize(max_size);
      std::sort(items.begin(), items.end());
      ++prov.clipped;
      prov.log.push_back("clipped line " + std::to_string(line_no) + " to " +
                         std::to_string(max_size) + " items");
    }
    kept.push_back(std::move(items));
  }
  if (prov.raw_baskets == 0) throw IoError(path + ": empty file");
  prov.raw_items = static_cast<std::int64_t>(raw_ids.size());
  return assemble(std::move(kept), rng, fractions, std::move(prov));
}

Corpus toy_corpus(Rng& rng) {
  std::vector<std::vector<std::int64_t>> raw;
  raw.reserve(2000);
  for (int i = 0; i < 1000; ++i) raw.push_back({1, 2});
  for (int i = 0; i < 1000; ++i) raw.push_back({3, 4});
  Provenance prov;
  prov.source = "toy";
  prov.raw_baskets = 2000;
  prov.raw_items = 4;
  // 80/20 train/test, with a tenth of the train share held for validation.
  return assemble(std::move(raw), rng, SplitFractions{0.72, 0.08, 0.20},
                  std::move(prov));
}

EmpiricalStats compute_stats(std::span<const Basket> train_baskets,
                             ItemIndex num_items) {
  if (train_baskets.empty()) throw InputError("compute_stats: no baskets");
  EmpiricalStats stats;
  stats.basket_count = static_cast<std::int64_t>(train_baskets.size());
  stats.occurrence_counts.assign(num_items, 0);
  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  for (const Basket& b : train_baskets) {
    b.check_against(num_items);
    const auto& items = b.items();
    for (ItemIndex i : items) ++stats.occurrence_counts[i];
    for (std::size_t a = 0; a < items.size(); ++a)
      for (std::size_t c = a + 1; c < items.size(); ++c)
        ++pair_counts[pair_key(items[a], items[c])];
  }
  const double n = static_cast<double>(stats.basket_count);
  stats.singleton_prob.resize(num_items);
  for (ItemIndex i = 0; i < num_items; ++i)
    stats.singleton_prob[i] =
        static_cast<double>(stats.occurrence_counts[i]) / n;
  stats.pair_prob.reserve(pair_counts.size());
  for (const auto& [key, count] : pair_counts)
    stats.pair_prob.emplace(key, static_cast<double>(count) / n);
  return stats;
}

int infer_rank(const Corpus& corpus) {
  return static_cast<int>(corpus.max_basket_size());
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "catalog.tsv");
    if (!out) throw IoError("cannot write " + dir + "/catalog.tsv");
    for (std::size_t d = 0; d < corpus.catalog.size(); ++d)
      out << d << '\t' << corpus.catalog[d] << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "baskets.txt");
    if (!out) throw IoError("cannot write " + dir + "/baskets.txt");
    for (const Basket& b : corpus.baskets) {
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (i) out << ' ';
        out << corpus.catalog[b.items()[i]];
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "splits.txt");
    if (!out) throw IoError("cannot write " + dir + "/splits.txt");
    for (Split s : corpus.splits)
      out << kSplitNames[static_cast<int>(s)] << '\n';
  }
}

Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  Corpus corpus;
  corpus.provenance.source = dir;

  {
    std::ifstream in(fs::path(dir) / "catalog.tsv");
    if (!in) throw IoError("cannot open " + dir + "/catalog.tsv");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::size_t dense;
      std::int64_t orig;
      if (!(ss >> dense >> orig) || dense != corpus.catalog.size())
        throw InputError(dir + "/catalog.tsv:" + std::to_string(line_no) +
                         ": bad catalog row");
      corpus.catalog.push_back(orig);
      corpus.to_dense.emplace(orig, static_cast<ItemIndex>(dense));
    }
    if (corpus.catalog.empty()) throw IoError(dir + ": empty catalog");
  }

  {
    std::ifstream in(fs::path(dir) / "baskets.txt");
    if (!in) throw IoError("cannot open " + dir + "/baskets.txt");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<ItemIndex> items;
      std::int64_t orig;
      while (ss >> orig) {
        const auto it = corpus.to_dense.find(orig);
        if (it == corpus.to_dense.end())
          throw InputError(dir + "/baskets.txt:" + std::to_string(line_no) +
                           ": item not in catalog");
        items.push_back(it->second);
      }
      corpus.baskets.emplace_back(std::move(items));
    }
  }

  {
    std::ifstream in(fs::path(dir) / "splits.txt");
    if (!in) throw IoError("cannot open " + dir + "/splits.txt");
    std::string name;
    while (in >> name)
      corpus.splits.push_back(split_from_name(name, dir + "/splits.txt"));
    if (corpus.splits.size() != corpus.baskets.size())
      throw InputError(dir + ": splits.txt not aligned with baskets.txt");
  }

  corpus.stats =
      compute_stats(corpus.split_baskets(Split::kTrain), corpus.num_items());
  return corpus;
}

}  // namespace dppce
