#include "privmt/types.hpp"

namespace privmt {

TokenSeq split_tokens(std::string_view text) {
  TokenSeq tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t space = text.find(' ', pos);
    if (space == std::string_view::npos) space = text.size();
    if (space > pos) tokens.emplace_back(text.substr(pos, space - pos));
    pos = space + 1;
  }
  return tokens;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace privmt
