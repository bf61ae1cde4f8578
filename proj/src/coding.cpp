#include "itrm/coding.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace itrm::coding {

CodedStructure encode(uint32_t m, const EdgeSet& edges, const std::vector<uint32_t>& f) {
    for (const auto& [a, b] : edges)
        if (a >= m || b >= m) throw std::invalid_argument("encode: edge out of range");
    if (f.size() != m) throw std::invalid_argument("encode: assignment has wrong size");
    std::vector<bool> seen(m, false);
    for (uint32_t v : f) {
        if (v >= m || seen[v]) throw std::invalid_argument("encode: assignment not a permutation");
        seen[v] = true;
    }
    CodedStructure cs;
    cs.domain_size = m;
    cs.edges = edges;
    cs.assignment = f;
    for (uint32_t a = 0; a < m; ++a)
        for (uint32_t b = 0; b < m; ++b)
            if (edges.count({f[a], f[b]})) cs.code.insert(cantor_pair(a, b));
    return cs;
}

CodedStructure canonical_code(uint32_t m, const EdgeSet& edges) {
    if (m > kCanonicalBound)
        throw std::invalid_argument("canonical_code: domain size exceeds brute-force bound");
    std::vector<uint32_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    CodedStructure best = encode(m, edges, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        CodedStructure cand = encode(m, edges, perm);
        if (std::lexicographical_compare(cand.code.begin(), cand.code.end(),
                                         best.code.begin(), best.code.end()))
            best = std::move(cand);
    }
    return best;
}

EdgeSet decode(const std::set<uint64_t>& code, uint32_t m) {
    EdgeSet out;
    for (uint32_t a = 0; a < m; ++a)
        for (uint32_t b = 0; b < m; ++b)
            if (code.count(cantor_pair(a, b))) out.insert({a, b});
    return out;
}

bool well_founded(uint32_t m, const EdgeSet& edges) {
    // Kahn's algorithm: acyclic iff every vertex gets removed.
    std::vector<uint32_t> indeg(m, 0);
    for (const auto& [a, b] : edges) {
        if (a >= m || b >= m) throw std::invalid_argument("well_founded: edge out of range");
        ++indeg[b];
    }
    std::vector<uint32_t> queue;
    for (uint32_t v = 0; v < m; ++v)
        if (indeg[v] == 0) queue.push_back(v);
    uint32_t removed = 0;
    while (!queue.empty()) {
        uint32_t v = queue.back();
        queue.pop_back();
        ++removed;
        for (const auto& [a, b] : edges)
            if (a == v && --indeg[b] == 0) queue.push_back(b);
    }
    return removed == m;
}

namespace {

// All CNF term sequences of the given weight with exponents below
// max_exponent, in no particular order.
void gen_with_weight(uint32_t weight, uint32_t max_exponent,
                     std::vector<OrdinalTerm>& prefix, std::vector<Ordinal>& out) {
    if (weight == 0) {
        out.push_back(Ordinal::from_terms(prefix));
        return;
    }
    for (uint32_t e = 0; e < max_exponent && e < weight; ++e) {
        for (uint64_t c = 1; e + c <= weight; ++c) {
            prefix.push_back({e, c});
            gen_with_weight(weight - e - static_cast<uint32_t>(c), e, prefix, out);
            prefix.pop_back();
        }
    }
}

std::vector<Ordinal> ordinals_of_weight(uint32_t weight) {
    std::vector<Ordinal> out;
    if (weight == 0) {
        out.emplace_back();  // 0
        return out;
    }
    std::vector<OrdinalTerm> prefix;
    // Leading exponents may not exceed the weight itself.
    gen_with_weight(weight, weight + 1, prefix, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Ordinal ord_of_index(uint64_t index) {
    uint64_t seen = 0;
    for (uint32_t w = 0;; ++w) {
        std::vector<Ordinal> block = ordinals_of_weight(w);
        if (index < seen + block.size()) return block[index - seen];
        seen += block.size();
    }
}

uint64_t index_of_ord(const Ordinal& o) {
    uint64_t seen = 0;
    for (uint32_t w = 0;; ++w) {
        std::vector<Ordinal> block = ordinals_of_weight(w);
        for (size_t i = 0; i < block.size(); ++i)
            if (block[i] == o) return seen + i;
        seen += block.size();
    }
}

OraclePtr ordinal_order_oracle(const Ordinal& delta) { return Oracle::ordinal_order(delta); }

Structure parse_structure(std::istream& in) {
    Structure s;
    std::string line;
    bool have_m = false;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        if (!have_m) {
            long long m;
            if (ls >> m) {
                if (m < 0 || m > 1'000'000)
                    throw std::invalid_argument("structure file: bad domain size");
                s.m = static_cast<uint32_t>(m);
                have_m = true;
                long long extra;
                if (ls >> extra)
                    throw std::invalid_argument("structure file: trailing data on size line");
            }
            continue;
        }
        long long a, b;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> b))
            throw std::invalid_argument("structure file: line " + std::to_string(line_no) +
                                        ": expected 'a b' edge");
        if (a < 0 || b < 0 || a >= s.m || b >= s.m)
            throw std::invalid_argument("structure file: line " + std::to_string(line_no) +
                                        ": edge out of range");
        s.edges.insert({static_cast<uint32_t>(a), static_cast<uint32_t>(b)});
    }
    if (!have_m) throw std::invalid_argument("structure file: missing domain size");
    return s;
}

Structure load_structure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open structure file: " + path);
    return parse_structure(in);
}

OraclePtr structure_code_oracle(const Structure& s, std::string label) {
    CodedStructure cs = canonical_code(s.m, s.edges);
    return Oracle::structure_code(cs.code, label.empty() ? "<structure>" : std::move(label));
}

StructureLoader structure_code_loader() {
    return [](const std::string& path) {
        return structure_code_oracle(load_structure(path), path);
    };
}

}  // namespace itrm::coding
