#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dhc/generators.hpp"
#include "dhc/json_io.hpp"
#include "test_support.hpp"

using namespace dhc;

TEST_SUITE_BEGIN("io");

TEST_CASE("round trip preserves cells in every dimension") {
  for (int dim = 1; dim <= 3; ++dim) {
    NamedSet s{test_support::random_set(dim, 3, 0.4, 400 + dim), {}};
    NamedSet back = set_from_json(set_to_json(s));
    CHECK(back.set == s.set);
    CHECK(back.set.depth() == 3);
  }
}

TEST_CASE("round trip preserves the generator block") {
  NamedSet s = gen_percolation(2, 4, 0.35, 0xdeadbeefcafe1234ull);
  NamedSet back = set_from_json(set_to_json(s));
  CHECK(back.set == s.set);
  CHECK(back.info.name == "percolation");
  CHECK(back.info.params.at("p") == 0.35);
  CHECK(back.info.params.at("depth") == 4.0);
  CHECK(back.info.seed == 0xdeadbeefcafe1234ull);

  NamedSet plain = gen_cantor_base4(3);
  NamedSet back2 = set_from_json(set_to_json(plain));
  CHECK_FALSE(back2.info.seed.has_value());
  CHECK(back2.info.params.at("t") == 3.0);
}

TEST_CASE("long 1d stretches serialize as runs") {
  NamedSet comb = gen_interval_comb(2, 10);
  std::string text = set_to_json(comb);
  CHECK(text.find("\"runs\"") != std::string::npos);
  CHECK(text.find("\"cells\"") == std::string::npos);
  CHECK(set_from_json(text).set == comb.set);

  // scattered cells stay a plain list
  NamedSet dust{GridSet::from_cells(1, 6, {{0, 0, 0}, {9, 0, 0}, {33, 0, 0}}), {}};
  std::string text2 = set_to_json(dust);
  CHECK(text2.find("\"cells\"") != std::string::npos);
  CHECK(text2.find("\"runs\"") == std::string::npos);
  CHECK(set_from_json(text2).set == dust.set);
}

TEST_CASE("higher dimensions never use runs") {
  NamedSet s{GridSet::full_cube(2, 3), {}};
  std::string text = set_to_json(s);
  CHECK(text.find("\"runs\"") == std::string::npos);
  CHECK(set_from_json(text).set == s.set);
}

TEST_CASE("file save and load") {
  std::string path = "io_roundtrip_tmp.json";
  NamedSet s = gen_dust_comb(2);
  save_set(s, path);
  NamedSet back = load_set(path);
  std::remove(path.c_str());
  CHECK(back.set == s.set);
  CHECK(back.info.name == "dust_comb");
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS_AS(set_from_json("not json"), domain_error);
  CHECK_THROWS_AS(set_from_json("[]"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"depth": 3, "cells": []})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 2, "depth": 3, "runs": [[0, 2]]})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 2, "depth": 3, "cells": [[1]]})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 1, "depth": 25, "cells": []})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 4, "depth": 2, "cells": []})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 1, "depth": 3, "cells": [[9]]})"), domain_error);
  CHECK_THROWS_AS(set_from_json(R"({"dim": 1, "depth": 3, "runs": [[2, -1]]})"), domain_error);
}

TEST_CASE("region payloads carry no generator block") {
  GridRegion r = cube_region(2, 3, CubeIndex{2, 1, {1, 0, 0}});
  std::string text = region_to_json(r);
  CHECK(text.find("generator") == std::string::npos);
  CHECK(set_from_json(text).set == r);
}

TEST_SUITE_END();
