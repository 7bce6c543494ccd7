#include "helpers.hpp"

#include <twograph/serialization.hpp>

using namespace twograph;
using namespace twograph::testing;

namespace {

std::vector<std::string> keys(const Json& j) {
  std::vector<std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.push_back(it.key());
  return out;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(GridJson, RoundTripIsByteIdentical) {
  for (const Fixture& f : {holo_pair_curved(0.7, 0.3), four_half_planes(1, 0.2, 0.05), branched_w32()}) {
    const auto g = generate(f, 1.0 / 8, 1.0);
    const std::string text = dump(to_json(g));
    const auto back = grid_from_json(Json::parse(text));
    ASSERT_EQ(back.size(), g.size());
    for (std::size_t s = 0; s < g.size(); ++s) ASSERT_EQ(back.value(s), g.value(s)) << f.id;
    EXPECT_EQ(dump(to_json(back)), text) << f.id;
  }
}

TEST(GridJson, NodeCountMismatchRejected) {
  Json j = to_json(generate(transverse_pair(), 1.0 / 4, 1.0));
  j["a1"].erase(0);
  try {
    grid_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(ConeJson, RoundTripKeepsTheCone) {
  // bases are re-orthonormalized on load, so equality is geometric
  Rng rng(12);
  for (const Fixture& f : {transverse_pair(), four_half_planes(2, 0.3, 0.1), holo_pair_curved(1, 1)}) {
    const Eigen::MatrixXd rot = random_rotation(rng, f.cone->ambient_dim());
    const Cone c = f.cone->mapped(rot, random_vec(rng, f.cone->ambient_dim(), 0.1));
    const std::string text = dump(to_json(c));
    const Cone back = cone_from_json(Json::parse(text));
    EXPECT_EQ(back.is_pair(), c.is_pair());
    EXPECT_EQ(back.axis_dim(), c.axis_dim());
    EXPECT_LT(nu(c, back, 500, 1), 1e-12) << f.id;
    for (std::size_t i = 0; i < c.pieces().size(); ++i)
      EXPECT_TRUE(back.pieces()[i].plane.same_as(c.pieces()[i].plane, 1e-12)) << f.id;
  }
}

TEST(ConeJson, UnknownClassRejected) {
  Json j = to_json(*transverse_pair().cone);
  j["class"] = "triple";
  EXPECT_THROW(cone_from_json(j), Error);
  j = to_json(*four_half_planes(0).cone);
  j["directions"].erase(0);
  EXPECT_THROW(cone_from_json(j), Error);
}

TEST(Report, EnvelopeKeysInOrder) {
  const Json r = make_report("excess", Json{{"h", 0.125}}, Json{{"value", 1.5}});
  EXPECT_EQ(keys(r), (std::vector<std::string>{"report", "version", "config", "result"}));
  EXPECT_EQ(r["version"], kVersion);
  const Json e = make_error_report("fit", Json::object(), "precondition", "too few samples");
  EXPECT_EQ(keys(e), (std::vector<std::string>{"report", "version", "config", "error"}));
  EXPECT_EQ(keys(e["error"]), (std::vector<std::string>{"command", "kind", "message"}));
  EXPECT_EQ(e["report"], "error");
}

TEST(Report, DumpEndsInOneNewline) {
  const std::string s = dump(Json{{"a", 1}});
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(s.back(), '\n');
  EXPECT_NE(s[s.size() - 2], '\n');
  EXPECT_EQ(s, "{\n  \"a\": 1\n}\n");
}

TEST(Report, NonFiniteDecayFieldsBecomeNull) {
  DecayReport r;
  r.center = Vec::Zero(3);
  const Json j = to_json(r);
  EXPECT_TRUE(j["slope"].is_null());
  EXPECT_TRUE(j["mean_nu_ratio"].is_null());
  EXPECT_TRUE(j["singular_graph"].is_null());
}

TEST(DecayCsv, HeaderAndRows) {
  DecayReport r;
  r.center = Vec::Zero(3);
  for (int j = 0; j < 3; ++j) {
    DecayRecord rec;
    rec.j = j;
    rec.scale = std::pow(0.5, j);
    rec.one_sided = 0.1 * rec.scale;
    rec.cone = *four_half_planes(0).cone;
    r.records.push_back(rec);
  }
  auto rows = lines(decay_csv(r));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "j,scale,one_sided,reverse,nu_step,rotation_step,mass,iterations,slope");
  // no slope: the last field is empty
  EXPECT_EQ(rows[2].back(), ',');
  EXPECT_EQ(rows[2].substr(0, 6), "1,0.5,");
  r.slope_available = true;
  r.slope = 1.25;
  rows = lines(decay_csv(r));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "1.25");
}

TEST(DecayCsv, ColumnsMatchTheRecords) {
  DecayReport r;
  r.center = Vec::Zero(3);
  DecayRecord rec;
  rec.scale = 0.25;
  rec.reverse = 1.0 / 3.0;
  rec.mass = 2.0;
  rec.iterations = 7;
  rec.cone = *four_half_planes(0).cone;
  r.records.push_back(rec);
  const auto row = lines(decay_csv(r)).at(1);
  std::vector<std::string> cells;
  std::istringstream in(row);
  for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 8u);  // trailing empty slope is dropped by getline
  EXPECT_EQ(std::stod(cells[1]), 0.25);
  EXPECT_EQ(std::stod(cells[3]), 1.0 / 3.0);  // 17 significant digits survive
  EXPECT_EQ(std::stoi(cells[7]), 7);
}
