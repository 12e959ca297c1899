#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "bage/data.hpp"
#include "../support/helpers.hpp"

using namespace bage;
using bage::testing::error_kind;

namespace {

ManifestRecord record(const std::string& house, int yoc, int fyoc = -1) {
  return {"img/" + house + ".png", house, yoc, fyoc < 0 ? yoc : fyoc, std::nullopt, ""};
}

std::vector<ManifestRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

}  // namespace

TEST_CASE("epoch_of_year maps decades and clamps the last epoch") {
  CHECK(epoch_of_year(1960).index == 0);
  CHECK(epoch_of_year(1960).name() == "1960s");
  CHECK(epoch_of_year(1969).index == 0);
  CHECK(epoch_of_year(1970).index == 1);
  CHECK(epoch_of_year(2009).index == 4);
  CHECK(epoch_of_year(2010).name() == "2010s");
  CHECK(epoch_of_year(2023).index == 5);
  CHECK(error_kind([] { epoch_of_year(1959); }) == ErrorKind::OutOfRange);
}

TEST_CASE("epoch_of_year is monotone and covers every epoch") {
  std::set<int> seen;
  int previous = 0;
  for (int year = 1960; year <= 2030; ++year) {
    const int idx = epoch_of_year(year).index;
    // independent closed form
    CHECK(idx == std::min((year - 1960) / 10, 5));
    CHECK(idx >= previous);
    previous = idx;
    if (year <= 2020) seen.insert(idx);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("filter_renovated keeps only unrenovated houses") {
  CHECK(filter_renovated(std::vector{record("a", 1980, 1980)}).size() == 1);
  CHECK(filter_renovated(std::vector{record("a", 1980, 1995)}).empty());
  CHECK(filter_renovated(std::vector<ManifestRecord>{}).empty());

  const std::vector in{record("a", 1970), record("b", 1980, 1990), record("c", 2000)};
  const auto out = filter_renovated(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].house_id == "a");
  CHECK(out[1].house_id == "c");
  CHECK(filter_renovated(out).size() == out.size());
}

TEST_CASE("split_by_house on ten single-image houses gives 7/1/2") {
  std::vector<ManifestRecord> records;
  for (int h = 0; h < 10; ++h) records.push_back(record("h" + std::to_string(h), 1990));
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 12345ULL}) {
    const auto out = split_by_house(records, {0.7, 0.1, 0.2}, seed);
    std::map<Split, int> counts;
    for (const auto& r : out) ++counts[*r.split];
    CHECK(counts[Split::Train] == 7);
    CHECK(counts[Split::Validation] == 1);
    CHECK(counts[Split::Test] == 2);
  }
}

TEST_CASE("split_by_house keeps a house in one split") {
  std::vector<ManifestRecord> one(5, record("solo", 1980));
  const auto out = split_by_house(one, {0.7, 0.1, 0.2}, 3);
  for (const auto& r : out) CHECK(r.split == out.front().split);
  CHECK(error_kind([] { split_by_house(std::vector<ManifestRecord>{}, {0.7, 0.1, 0.2}, 1); }) ==
        ErrorKind::EmptyInput);
  CHECK(error_kind([&] { split_by_house(one, {0.5, 0.1, 0.2}, 1); }) == ErrorKind::Config);
}

TEST_CASE("split_by_house property: exact house partition for random multiplicities") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ManifestRecord> records;
    const int houses = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int h = 0; h < houses; ++h) {
      const int n = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int i = 0; i < n; ++i) records.push_back(record("h" + std::to_string(h), 1960));
    }
    std::shuffle(records.begin(), records.end(), rng);
    const auto seed = rng();
    const auto out = split_by_house(records, {0.7, 0.1, 0.2}, seed);
    REQUIRE(out.size() == records.size());
    std::map<std::string, Split> house_split;
    for (std::size_t i = 0; i < out.size(); ++i) {
      REQUIRE(out[i].split.has_value());
      CHECK(out[i].house_id == records[i].house_id);
      const auto [it, inserted] = house_split.emplace(out[i].house_id, *out[i].split);
      if (!inserted) CHECK(it->second == *out[i].split);
    }
    const auto again = split_by_house(records, {0.7, 0.1, 0.2}, seed);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].split == out[i].split);
  }
}

TEST_CASE("parse_manifest reads records and ignores unknown columns") {
  const auto recs = parse("image_path,house_id,yoc,fyoc,notes\nimgs/a.png,h1,1984,1984,anything\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].image_path == "imgs/a.png");
  CHECK(recs[0].house_id == "h1");
  CHECK(recs[0].yoc == 1984);
  CHECK_FALSE(recs[0].split.has_value());

  const auto split = parse("house_id,image_path,fyoc,yoc,split\nh,x.png,2001,2001,val\nh,y.png,2001,2001,test\n");
  REQUIRE(split.size() == 2);
  CHECK(split[0].split == Split::Validation);
  CHECK(split[1].split == Split::Test);
}

TEST_CASE("parse_manifest reports malformed rows with their line") {
  auto parse_error_line = [](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      return e.line();
    }
    return -2L;
  };
  CHECK(parse_error_line("image_path,house_id,yoc,fyoc\na.png,h,1990,1980\n") == 2);
  CHECK(parse_error_line("image_path,house_id,yoc,fyoc\na.png,h,1990,1990\nb.png,h,19x0,1990\n") == 3);
  CHECK(parse_error_line("image_path,house_id,yoc,fyoc\na.png,h,1990\n") == 2);
  CHECK(parse_error_line("image_path,house_id,yoc,fyoc,split\na.png,h,1990,1990,holdout\n") == 2);
  CHECK(error_kind([] { parse("image_path,yoc,fyoc\na.png,1990,1990\n"); }) == ErrorKind::MissingColumn);
}

TEST_CASE("format_manifest round-trips through parse_manifest") {
  auto recs = split_by_house(std::vector{record("a", 1960), record("b", 1975, 1980), record("c", 2015)},
                             {0.7, 0.1, 0.2}, 5);
  recs[1].mask_path = "masks/b.png";
  const auto back = parse(format_manifest(recs));
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].image_path == recs[i].image_path);
    CHECK(back[i].house_id == recs[i].house_id);
    CHECK(back[i].yoc == recs[i].yoc);
    CHECK(back[i].fyoc == recs[i].fyoc);
    CHECK(back[i].split == recs[i].split);
    CHECK(back[i].mask_path == recs[i].mask_path);
  }
}

TEST_CASE("synth_corpus counts, labels and determinism") {
  SynthParams p;
  p.n_per_class = 2;
  p.image_size = 48;
  p.seed = 7;
  const auto a = synth_corpus(p);
  CHECK(a.images.size() == 12);
  CHECK(a.records.size() == 12);
  CHECK(a.masks.size() == 12);
  std::map<int, int> per_epoch;
  for (const auto& r : a.records) {
    CHECK(r.yoc == r.fyoc);
    ++per_epoch[epoch_of_year(r.yoc).index];
  }
  CHECK(per_epoch.size() == 6);
  for (const auto& [epoch, n] : per_epoch) CHECK(n == 2);
  for (const auto& img : a.images) {
    CHECK(img.width == 48);
    CHECK(img.height == 48);
  }

  const auto b = synth_corpus(p);
  CHECK(a.images == b.images);
  CHECK(a.masks == b.masks);
  p.seed = 8;
  CHECK_FALSE(synth_corpus(p).images == a.images);
}

TEST_CASE("synth_corpus clutter fraction controls masked pixels") {
  SynthParams p;
  p.n_per_class = 1;
  p.image_size = 64;
  p.clutter_fraction = 0.0;
  for (const auto& m : synth_corpus(p).masks)
    CHECK(std::all_of(m.data.begin(), m.data.end(), [](std::uint8_t v) { return v == 0; }));

  p.clutter_fraction = 0.2;
  for (const auto& m : synth_corpus(p).masks) {
    const auto covered = std::count_if(m.data.begin(), m.data.end(), [](std::uint8_t v) { return v != 0; });
    CHECK(static_cast<double>(covered) / static_cast<double>(m.data.size()) >= 0.2);
    for (auto v : m.data) CHECK(v < kNumRelevanceClasses);
  }
}

TEST_CASE("SynthParams validation") {
  SynthParams p;
  p.n_per_class = 0;
  CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
  p = {};
  p.clutter_fraction = 1.5;
  CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
}

TEST_CASE("relevance class names follow the fixed ordering") {
  CHECK(std::string(relevance_class_name(0)) == "building");
  CHECK(std::string(relevance_class_name(1)) == "cars");
  CHECK(std::string(relevance_class_name(12)) == "miscellaneous");
}
