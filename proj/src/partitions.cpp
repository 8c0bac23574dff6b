#include "polyspec/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "polyspec/error.hpp"

namespace polyspec {

IncidenceMatrix::IncidenceMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows) * cols, 0), owner_(cols, -1) {
    if (rows < 1 || cols < 1) throw InputError("incidence matrix needs positive dimensions");
}

IncidenceMatrix IncidenceMatrix::from_owners(int rows, const std::vector<int>& owner) {
    IncidenceMatrix M(rows, static_cast<int>(owner.size()));
    for (int j = 0; j < M.cols_; ++j) {
        if (owner[j] < 0 || owner[j] >= rows) throw InputError("column owner out of range");
        M.owner_[j] = owner[j];
        M.e_[static_cast<std::size_t>(owner[j]) * M.cols_ + j] = 1;
    }
    for (int i = 0; i < rows; ++i)
        if (M.row_sum(i) == 0) throw InputError("incidence matrix has an empty row");
    return M;
}

int IncidenceMatrix::row_sum(int i) const {
    int s = 0;
    for (int j = 0; j < cols_; ++j) s += at(i, j);
    return s;
}

std::vector<Composition> compositions(int m, int k) {
    if (k < 1) throw InputError("compositions: k must be >= 1");
    if (m < 1 || m > k + 1) throw InputError("compositions: m must lie in 1..k+1");
    std::vector<Composition> out;
    Composition cur;
    auto rec = [&](auto& self, int left, int parts) -> void {
        if (parts == 1) {
            cur.push_back(left);
            out.push_back(cur);
            cur.pop_back();
            return;
        }
        for (int p = 1; p <= left - (parts - 1); ++p) {
            cur.push_back(p);
            self(self, left - p, parts - 1);
            cur.pop_back();
        }
    };
    rec(rec, k + 1, m);
    return out;
}

std::vector<IncidenceMatrix> incidence_matrices(const Composition& l, int k) {
    const int m = static_cast<int>(l.size());
    int total = 0;
    for (int p : l) {
        if (p < 1) throw InputError("composition parts must be positive");
        total += p;
    }
    if (total != k + 1) throw InputError("composition must sum to k+1");
    std::vector<IncidenceMatrix> out;
    std::vector<int> owner(k + 1, -1);
    std::vector<int> left(l.begin(), l.end());
    auto rec = [&](auto& self, int col) -> void {
        if (col == k + 1) {
            out.push_back(IncidenceMatrix::from_owners(m, owner));
            return;
        }
        for (int i = 0; i < m; ++i) {
            if (left[i] == 0) continue;
            --left[i];
            owner[col] = i;
            self(self, col + 1);
            ++left[i];
        }
    };
    rec(rec, 0);
    return out;
}

namespace {

std::vector<int> row_key(const PartitionScheme& s, int i) {
    std::vector<int> key;
    for (int j = 0; j < s.A.cols(); ++j) key.push_back(s.A.at(i, j));
    for (int j = 0; j < s.B.cols(); ++j) key.push_back(s.B.at(i, j));
    return key;
}

bool canonical(const PartitionScheme& s) {
    for (int i = 1; i < s.m; ++i)
        if (!(row_key(s, i - 1) < row_key(s, i))) return false;
    return true;
}

std::vector<PartitionScheme> build_schemes(int k, int m, bool ordered) {
    std::vector<IncidenceMatrix> mats;
    for (const auto& l : compositions(m, k))
        for (auto& M : incidence_matrices(l, k)) mats.push_back(std::move(M));
    std::vector<PartitionScheme> out;
    for (const auto& A : mats)
        for (const auto& B : mats) {
            PartitionScheme s{A, B, m, std::vector<int>(m)};
            for (int i = 0; i < m; ++i) s.block_orders[i] = A.row_sum(i) + B.row_sum(i) - 1;
            if (ordered || canonical(s)) out.push_back(std::move(s));
        }
    return out;
}

}  // namespace

const std::vector<PartitionScheme>& partition_schemes(int k, int m, bool ordered) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, bool>, std::vector<PartitionScheme>> cache;
    if (k < 1) throw InputError("partition_schemes: k must be >= 1");
    if (m < 1 || m > k + 1) throw InputError("partition_schemes: m must lie in 1..k+1");
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(k, m, ordered);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_schemes(k, m, ordered)).first;
    return it->second;
}

int constraint_rank(const PartitionScheme& s) {
    const int k = s.A.cols() - 1;
    const int n = 2 * k;
    std::vector<std::vector<double>> rows(s.m, std::vector<double>(n, 0.0));
    auto add = [&](std::vector<double>& row, int col, int offset, double sign) {
        if (col < k) {
            row[offset + col] += sign;
        } else {
            for (int c = 0; c < k; ++c) row[offset + c] -= sign;
        }
    };
    for (int i = 0; i < s.m; ++i)
        for (int j = 0; j <= k; ++j) {
            if (s.A.at(i, j)) add(rows[i], j, 0, 1.0);
            if (s.B.at(i, j)) add(rows[i], j, k, -1.0);
        }
    int rank = 0;
    for (int c = 0; c < n && rank < s.m; ++c) {
        int piv = -1;
        for (int r = rank; r < s.m; ++r)
            if (std::abs(rows[r][c]) > 1e-9) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(rows[piv], rows[rank]);
        for (int r = 0; r < s.m; ++r) {
            if (r == rank || std::abs(rows[r][c]) < 1e-12) continue;
            const double f = rows[r][c] / rows[rank][c];
            for (int j = 0; j < n; ++j) rows[r][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return rank;
}

const std::vector<std::vector<std::vector<int>>>& set_partitions(int n) {
    static std::mutex mu;
    static std::map<int, std::vector<std::vector<std::vector<int>>>> cache;
    if (n < 1 || n > 12) throw InputError("set_partitions: n must lie in 1..12");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<std::vector<std::vector<int>>> out;
    std::vector<int> rgs(n, 0);  // restricted growth string
    auto rec = [&](auto& self, int i, int blocks) -> void {
        if (i == n) {
            std::vector<std::vector<int>> part(blocks);
            for (int j = 0; j < n; ++j) part[rgs[j]].push_back(j);
            out.push_back(std::move(part));
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            rgs[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    rgs[0] = 0;
    rec(rec, 1, 1);
    return cache.emplace(n, std::move(out)).first->second;
}

std::string to_string(const IncidenceMatrix& M) {
    std::string s = "[";
    for (int i = 0; i < M.rows(); ++i) {
        if (i) s += "; ";
        for (int j = 0; j < M.cols(); ++j) s += M.at(i, j) ? '1' : '0';
    }
    return s + "]";
}

}  // namespace polyspec
