// Inference problem: premises, hypothesis and gold label.

#pragma once

#include <string>
#include <vector>

#include "natab/llf.hpp"
#include "natab/tableau.hpp"

namespace natab {

struct Problem {
  std::string id;
  std::vector<Term> premises;
  Term hypothesis;
  Label gold = Label::neutral;
  std::vector<std::string> raw_text;
  // False for problems the reference KB is not expected to solve.
  bool solvable = true;
};

}  // namespace natab
