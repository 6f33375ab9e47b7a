#include "specdec/corpus.hpp"

#include <fstream>
#include <sstream>

#include "specdec/errors.hpp"

namespace specdec {

std::vector<TokenId> tokenize_line(const std::string& line, const Vocabulary& vocab, long line_no) {
  std::vector<TokenId> out;
  std::istringstream ss(line);
  std::string sym;
  while (ss >> sym) {
    const TokenId id = vocab.id_of(sym);
    if (id < 0) throw ParseError("unknown symbol '" + sym + "'", line_no);
    out.push_back(id);
  }
  return out;
}

std::vector<std::vector<TokenId>> load_corpus(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<std::vector<TokenId>> docs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto doc = tokenize_line(line, vocab, line_no);
    if (!doc.empty()) docs.push_back(std::move(doc));
  }
  return docs;
}

std::string detokenize(TokenSpan tokens, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.symbol(tokens[i]);
  }
  return out;
}

}  // namespace specdec
