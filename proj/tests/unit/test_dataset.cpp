#include <doctest.h>

#include <sstream>

#include "kdesplit/dataset.hpp"
#include "kdesplit/error.hpp"

using namespace kdesplit;

TEST_CASE("csv with and without header") {
  std::istringstream with_header("x,y\n0.5,1\n-2,3.25\n");
  const Dataset a = read_csv(with_header);
  CHECK(a.size() == 2);
  CHECK(a.dim() == 2);
  CHECK(a.point(1)[0] == -2.0);
  CHECK(a.point(1)[1] == 3.25);

  std::istringstream bare("1\n2\n3\n");
  const Dataset b = read_csv(bare);
  CHECK(b.size() == 3);
  CHECK(b.dim() == 1);
}

TEST_CASE("csv round trip") {
  const Dataset d({0.1, 0.2, 1e-17, -3.0, 0.3333333333333333, 7.0}, 2);
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  const Dataset back = read_csv(in);
  CHECK(back.coords() == d.coords());
  CHECK(back.dim() == 2);
}

TEST_CASE("csv rejects malformed input") {
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_csv(ragged), ConfigError);
  std::istringstream nan("1,2\nnan,3\n");
  CHECK_THROWS_AS(read_csv(nan), ConfigError);
  std::istringstream inf("1\ninf\n");
  CHECK_THROWS_AS(read_csv(inf), ConfigError);
  std::istringstream junk("1\nabc\n");
  CHECK_THROWS_AS(read_csv(junk), ConfigError);
  std::istringstream empty("x\n");
  CHECK_THROWS_AS(read_csv(empty), ConfigError);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), ConfigError);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset({}, 1), ConfigError);
  CHECK_THROWS_AS(Dataset({1.0, 2.0, 3.0}, 2), ConfigError);
  const Dataset d({3.0, 1.0, 2.0, 1.0}, 1);
  const SortedAxis s = sort_axis(d);
  CHECK(s.order == std::vector<std::size_t>{1, 3, 2, 0});
  CHECK(s.coords == std::vector<double>{1.0, 1.0, 2.0, 3.0});
  CHECK(d.lower()[0] == 1.0);
  CHECK(d.upper()[0] == 3.0);
}
