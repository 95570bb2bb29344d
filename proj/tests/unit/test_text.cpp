#include <stdexcept>
#include <doctest.h>

#include "factsum/text.hpp"

using namespace factsum;

TEST_CASE("normalize_surface folds case and whitespace") {
  CHECK(normalize_surface("  Manchester \t City ") == "manchester city");
  CHECK(normalize_surface("") == "");
  CHECK(normalize_surface("MÜNCHEN") == "m\xC3\x9C" "nchen");
}

TEST_CASE("normalize_spacing drops space before punctuation") {
  CHECK(normalize_spacing("boiling water .") == "boiling water.");
  CHECK(normalize_spacing("a  b ,  c") == "a b, c");
  CHECK(normalize_spacing(" x ") == "x");
}

TEST_CASE("utf8 helpers") {
  CHECK(is_valid_utf8("plain"));
  CHECK(is_valid_utf8("caf\xC3\xA9"));
  CHECK_FALSE(is_valid_utf8("bad\xC3"));
  CHECK_FALSE(is_valid_utf8("\xFF"));
  const std::string s = "caf\xC3\xA9!";
  CHECK(is_char_boundary(s, 3));
  CHECK_FALSE(is_char_boundary(s, 4));
  CHECK(is_char_boundary(s, 5));
  CHECK(is_char_boundary(s, s.size()));
  CHECK_FALSE(is_char_boundary(s, s.size() + 1));
}

TEST_CASE("substring counting") {
  CHECK(contains("a <mask> b", "<mask>"));
  CHECK_FALSE(contains("abc", "abd"));
  CHECK(count_occurrences("<m><m> <m>", "<m>") == 3);
  CHECK(count_occurrences("aaaa", "aa") == 2);
}
