#include "specdec/memory.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "specdec/errors.hpp"

namespace specdec {

CorrectionMemory::CorrectionMemory(std::uint32_t lambda, std::optional<std::size_t> capacity)
    : lambda_(lambda), capacity_(capacity) {
  if (lambda_ == 0) throw InvariantError("frequency threshold lambda must be positive");
  if (capacity_ && *capacity_ == 0) throw InvariantError("capacity must be positive when set");
}

std::uint64_t CorrectionMemory::total_count() const {
  std::uint64_t sum = 0;
  for (const auto& [key, c] : table_) sum += c;
  return sum;
}

std::uint64_t CorrectionMemory::count(TokenId draft_tok, TokenId target_tok) const {
  auto it = table_.find({draft_tok, target_tok});
  return it == table_.end() ? 0 : it->second;
}

bool CorrectionMemory::should_propose(TokenId draft_tok, TokenId target_tok) const {
  return count(draft_tok, target_tok) >= lambda_;
}

void CorrectionMemory::update(TokenId draft_tok, TokenId target_tok) {
  const Key key{draft_tok, target_tok};
  auto it = table_.find(key);
  if (it != table_.end()) {
    it->second += 1;
    return;
  }
  if (capacity_ && table_.size() >= *capacity_) {
    // evict min count, ties to the smaller lexicographic key
    auto victim = table_.begin();
    for (auto jt = table_.begin(); jt != table_.end(); ++jt) {
      if (jt->second < victim->second) victim = jt;
    }
    table_.erase(victim);
  }
  table_[key] = 1;
}

void CorrectionMemory::merge(const CorrectionMemory& other) {
  if (other.lambda_ != lambda_) throw InvariantError("merging memories with different lambda");
  for (const auto& [key, c] : other.table_) table_[key] += c;
}

bool CorrectionMemory::operator==(const CorrectionMemory& other) const {
  return lambda_ == other.lambda_ && capacity_ == other.capacity_ && table_ == other.table_;
}

void CorrectionMemory::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write memory file: " + path);
  out << "#csd-ocm v1 lambda=" << lambda_ << " capacity=";
  if (capacity_) out << *capacity_;
  else out << "none";
  out << '\n';

  std::vector<std::pair<Key, std::uint64_t>> entries(table_.begin(), table_.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [key, c] : entries) {
    out << key.first << '\t' << key.second << '\t' << c << '\n';
  }
}

CorrectionMemory CorrectionMemory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open memory file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty memory file: " + path, 1);

  std::istringstream hs(header);
  std::string magic, field;
  hs >> magic;
  if (magic != "#csd-ocm") throw ParseError("not a csd-ocm file: " + path, 1);
  hs >> magic;
  if (magic != "v1") throw ParseError("unsupported csd-ocm version '" + magic + "'", 1);

  std::optional<std::uint32_t> lambda;
  std::optional<std::size_t> capacity;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + field + "'", 1);
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "lambda") {
      lambda = static_cast<std::uint32_t>(std::stoul(val));
    } else if (key == "capacity") {
      if (val != "none") capacity = static_cast<std::size_t>(std::stoul(val));
    } else {
      throw ParseError("unknown header field '" + key + "'", 1);
    }
  }
  if (!lambda) throw ParseError("memory file header is missing lambda", 1);

  CorrectionMemory memory(*lambda, capacity);
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long draft_tok, target_tok, count;
    char t1, t2;
    if (!(ls >> draft_tok >> std::noskipws >> t1 >> std::skipws >> target_tok >> std::noskipws >>
          t2 >> std::skipws >> count) ||
        t1 != '\t' || t2 != '\t') {
      throw ParseError("malformed memory row", line_no);
    }
    if (count < 0) throw ParseError("negative count", line_no);
    if (draft_tok < 0 || target_tok < 0) throw ParseError("negative token id", line_no);
    memory.table_[{static_cast<TokenId>(draft_tok), static_cast<TokenId>(target_tok)}] =
        static_cast<std::uint64_t>(count);
  }
  return memory;
}

}  // namespace specdec
