#include "ose/error.hpp"
#include "ose/sparsemat.hpp"
#include "text_util.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace ose {

using detail::format_real;
using detail::parse_double;
using detail::parse_u64;
using detail::split_ws;

void write_ose1(std::ostream& out, const SketchMatrix& pi) {
    out << "OSE1 " << pi.rows() << ' ' << pi.cols() << ' ' << pi.max_col_nnz() << '\n';
    for (Index j = 0; j < pi.cols(); ++j) {
        const auto col = pi.column(j);
        if (col.empty()) continue;
        out << j << ' ' << col.size();
        for (const Entry& e : col) out << ' ' << e.row << ' ' << format_real(e.value);
        out << '\n';
    }
}

SketchMatrix read_ose1(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "OSE1: empty input");
    const auto head = split_ws(line);
    if (head.size() != 4 || head[0] != "OSE1")
        fail(ErrorKind::Parse, "OSE1: header must be 'OSE1 <m> <n> <s>'");
    const Index m = parse_u64(head[1], "OSE1 header m");
    const Index n = parse_u64(head[2], "OSE1 header n");
    const Index s = parse_u64(head[3], "OSE1 header s");

    std::vector<SparseColumn> cols(n);
    std::vector<bool> seen(n, false);
    while (detail::next_content_line(in, line)) {
        const auto toks = split_ws(line);
        if (toks.size() < 2) fail(ErrorKind::Parse, "OSE1: column line too short");
        const Index j = parse_u64(toks[0], "OSE1 column index");
        const Index k = parse_u64(toks[1], "OSE1 entry count");
        if (j >= n) fail(ErrorKind::Parse, "OSE1: column index " + std::to_string(j) + " out of range");
        if (seen[j]) fail(ErrorKind::Parse, "OSE1: column " + std::to_string(j) + " listed twice");
        if (toks.size() != 2 + 2 * k)
            fail(ErrorKind::Parse, "OSE1: column " + std::to_string(j) + " declares " + std::to_string(k) +
                                       " entries but line has " + std::to_string((toks.size() - 2) / 2));
        seen[j] = true;
        SparseColumn col;
        col.reserve(k);
        for (Index t = 0; t < k; ++t)
            col.push_back({parse_u64(toks[2 + 2 * t], "OSE1 row"), parse_double(toks[3 + 2 * t], "OSE1 value")});
        cols[j] = std::move(col);
    }
    try {
        return SketchMatrix(m, n, s, std::move(cols));
    } catch (const Error& e) {
        fail(ErrorKind::Parse, std::string("OSE1: ") + e.what());
    }
}

void write_ose1d(std::ostream& out, const DenseMatrix& a) {
    out << "OSE1D " << a.rows() << ' ' << a.cols() << '\n';
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j) out << ' ';
            out << format_real(a(i, j));
        }
        out << '\n';
    }
}

DenseMatrix read_ose1d(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "OSE1D: empty input");
    const auto head = split_ws(line);
    if (head.size() != 3 || head[0] != "OSE1D") fail(ErrorKind::Parse, "OSE1D: header must be 'OSE1D <m> <n>'");
    const Index m = parse_u64(head[1], "OSE1D header m");
    const Index n = parse_u64(head[2], "OSE1D header n");
    std::vector<double> data;
    data.reserve(m * n);
    while (detail::next_content_line(in, line))
        for (auto tok : split_ws(line)) data.push_back(parse_double(tok, "OSE1D value"));
    if (data.size() != m * n)
        fail(ErrorKind::Parse, "OSE1D: expected " + std::to_string(m * n) + " values, got " + std::to_string(data.size()));
    try {
        return DenseMatrix(m, n, std::move(data));
    } catch (const Error& e) {
        fail(ErrorKind::Parse, std::string("OSE1D: ") + e.what());
    }
}

}  // namespace ose
