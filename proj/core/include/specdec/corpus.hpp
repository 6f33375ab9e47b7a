#pragma once

#include <string>
#include <vector>

#include "specdec/types.hpp"

namespace specdec {

// Corpus file: UTF-8, one document per line, whitespace-separated symbols
// resolved against the vocabulary. Unknown symbols raise ParseError with
// the line number.
std::vector<std::vector<TokenId>> load_corpus(const std::string& path, const Vocabulary& vocab);

// Resolves a single whitespace-separated symbol string.
std::vector<TokenId> tokenize_line(const std::string& line, const Vocabulary& vocab,
                                   long line_no = -1);

std::string detokenize(TokenSpan tokens, const Vocabulary& vocab);

}  // namespace specdec
