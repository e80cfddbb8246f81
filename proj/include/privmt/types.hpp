#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace privmt {

// The whole pipeline operates on pre-tokenized text: a sentence is a
// sequence of UTF-8 tokens, and token boundaries are never revisited.
using Token = std::string;
using TokenSeq = std::vector<Token>;

// Splits on single spaces; consecutive spaces yield no empty tokens.
TokenSeq split_tokens(std::string_view text);

// Joins with single spaces.
std::string join_tokens(const TokenSeq& tokens);

}  // namespace privmt
