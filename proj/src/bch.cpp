#include "carnot/bch.hpp"

#include <map>

namespace carnot {

namespace {

// Enumerate block sequences ((p_1,q_1),...,(p_n,q_n)), p_i+q_i >= 1, with
// total letter count L <= max_weight, accumulating the series coefficient
// (-1)^{n+1} / (n * L * prod p_i! q_i!) on the concatenated word
// x^{p_1} y^{q_1} ... x^{p_n} y^{q_n}.
void enumerate_blocks(int max_weight, int n, int used, Rat fact_prod,
                      std::vector<std::uint8_t>& word,
                      std::map<std::vector<std::uint8_t>, Rat>& acc) {
  if (used >= 1) {
    // close the sequence here with n blocks
    int L = used;
    Rat coeff = Rat((n % 2) ? 1 : -1) / (Rat(n) * Rat(L) * fact_prod);
    acc[word] += coeff;
  }
  if (used >= max_weight) return;
  // append one more block
  static const long factorial[7] = {1, 1, 2, 6, 24, 120, 720};
  for (int p = 0; p <= max_weight - used; ++p) {
    for (int q = (p == 0 ? 1 : 0); p + q <= max_weight - used; ++q) {
      size_t mark = word.size();
      word.insert(word.end(), p, 0);
      word.insert(word.end(), q, 1);
      enumerate_blocks(max_weight, n + 1, used + p + q, fact_prod * factorial[p] * factorial[q],
                       word, acc);
      word.resize(mark);
    }
  }
}

}  // namespace

Bch build_bch_table(Alg a) {
  if (a->step > 6) throw std::invalid_argument("build_bch_table: step out of supported range");
  std::map<std::vector<std::uint8_t>, Rat> acc;
  std::vector<std::uint8_t> word;
  enumerate_blocks(a->step, 0, 0, Rat(1), word, acc);

  // Normalize: drop words with equal trailing letters (zero bracket), fold
  // ...yx into ...xy with a sign flip.
  std::map<std::vector<std::uint8_t>, Rat> canon;
  for (auto& [w, c] : acc) {
    if (c == 0) continue;
    std::vector<std::uint8_t> cw = w;
    Rat cc = c;
    size_t L = cw.size();
    if (L >= 2) {
      if (cw[L - 2] == cw[L - 1]) continue;
      if (cw[L - 2] == 1) {  // ...yx -> -...xy
        cw[L - 2] = 0;
        cw[L - 1] = 1;
        cc = -cc;
      }
    }
    canon[cw] += cc;
  }

  auto table = std::make_shared<BchTable>();
  table->alg = a;
  table->by_weight.resize(a->step);
  for (auto& [w, c] : canon) {
    if (c == 0) continue;
    table->by_weight[w.size() - 1].push_back({w, c, c.get_d()});
  }
  return table;
}

}  // namespace carnot
