#include "apent/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace apent {

namespace {

using nlohmann::json;

json matrix_json(const CMat& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMat matrix_parse(const json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<std::size_t>(rows * cols))
    throw std::invalid_argument("matrix_from_json: " +
                                std::to_string(data.size()) +
                                " entries for a " + std::to_string(rows) +
                                "x" + std::to_string(cols) + " matrix");
  CMat m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2, ++idx)
      m(i, j2) = {data[idx].at(0).get<double>(), data[idx].at(1).get<double>()};
  return m;
}

json pdf_json(const PdFunction& phi) {
  json out{{"rank", phi.rank()},
           {"k", phi.block_size()},
           {"radius", phi.radius()},
           {"kind", phi.kind()}};
  if (phi.kind() == "haagerup") {
    json vals = json::array();
    for (const auto& v : phi.letter_values())
      vals.push_back({v.real(), v.imag()});
    out["values"] = std::move(vals);
  } else if (phi.kind() == "mollified") {
    out["s"] = phi.mollify_s();
    out["base"] = pdf_json(phi.mollify_base());
  } else if (phi.kind() == "table") {
    Alphabet alpha(phi.rank());
    std::vector<Word> words = phi.stored_words();
    // One representative per {g, g^{-1}} pair, in length-lex order.
    words.erase(std::remove_if(words.begin(), words.end(),
                               [&alpha](const Word& w) {
                                 return length_lex_less(alpha, inv(w), w);
                               }),
                words.end());
    std::sort(words.begin(), words.end(),
              [&alpha](const Word& x, const Word& y) {
                return length_lex_less(alpha, x, y);
              });
    json entries = json::array();
    for (const Word& w : words)
      entries.push_back({to_string(w), matrix_json(phi.value(w))});
    out["entries"] = std::move(entries);
  }
  return out;
}

PdFunction pdf_parse(const json& j) {
  int rank = j.at("rank").get<int>();
  int k = j.at("k").get<int>();
  int radius = j.at("radius").get<int>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "regular") return regular_character(rank, k);
  if (kind == "haagerup") {
    std::vector<std::complex<double>> vals;
    for (const auto& v : j.at("values"))
      vals.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    return haagerup(vals, rank, radius);
  }
  if (kind == "mollified")
    return mollify(pdf_parse(j.at("base")), j.at("s").get<double>());
  if (kind == "table") {
    PdFunction out(rank, k, radius);
    for (const auto& e : j.at("entries"))
      out.set_value(parse_word(e.at(0).get<std::string>(), rank),
                    matrix_parse(e.at(1)));
    return out;
  }
  throw std::invalid_argument("pdf_from_json: unknown kind \"" + kind + "\"");
}

// Finite values stay numbers; the extended values become strings/null so the
// document remains valid JSON.
json extended(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  return x;
}

}  // namespace

std::string num17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string matrix_to_json(const CMat& m) { return matrix_json(m).dump(); }

CMat matrix_from_json(const std::string& text) {
  return matrix_parse(json::parse(text));
}

std::string pdf_to_json(const PdFunction& phi) { return pdf_json(phi).dump(); }

PdFunction pdf_from_json(const std::string& text) {
  return pdf_parse(json::parse(text));
}

std::string block_gram_to_json(const BlockGram& G) {
  json words = json::array();
  for (const Word& w : G.words) words.push_back(to_string(w));
  json out{{"k", G.k},
           {"words", std::move(words)},
           {"matrix", matrix_json(G.gram)}};
  return out.dump();
}

std::string report_to_json(const EntropyReport& rep) {
  json rows = json::array();
  for (const EntropyRow& row : rep.rows)
    rows.push_back({{"n", row.n},
                    {"seq1", extended(row.seq1)},
                    {"seq2", extended(row.seq2)},
                    {"avg", extended(row.avg)},
                    {"seward_partial", extended(row.seward_partial)},
                    {"verblunsky_partial", extended(row.verblunsky_partial)}});
  json out{{"rank", rep.rank},
           {"k", rep.k},
           {"max_n", rep.max_n},
           {"radius_used", rep.radius_used},
           {"gap_tol", rep.gap_tol},
           {"rows", std::move(rows)},
           {"converged", rep.converged},
           {"value", extended(rep.value)},
           {"upper", extended(rep.upper)},
           {"gap", extended(rep.gap)},
           {"first_singular_n", rep.first_singular_n},
           {"negative_witness", rep.negative_witness}};
  return out.dump();
}

std::string report_to_csv(const EntropyReport& rep) {
  std::string out = "n,seq1,seq2,avg,seward_partial,verblunsky_partial\n";
  for (const EntropyRow& row : rep.rows) {
    out += std::to_string(row.n);
    for (double x : {row.seq1, row.seq2, row.avg, row.seward_partial,
                     row.verblunsky_partial}) {
      out += ',';
      out += num17(x);
    }
    out += '\n';
  }
  return out;
}

std::string mcreport_to_json(const McReport& rep) {
  json stats = json::array();
  for (const McStat& s : rep.stats)
    stats.push_back(
        {{"name", s.name}, {"value", extended(s.value)}, {"se", extended(s.se)}});
  json verdicts = json::array();
  for (const McVerdict& v : rep.verdicts)
    verdicts.push_back(
        {{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  json out{{"experiment", rep.experiment},
           {"seed", rep.seed},
           {"samples", rep.samples},
           {"stats", std::move(stats)},
           {"verdicts", std::move(verdicts)},
           {"pass", rep.pass}};
  return out.dump();
}

std::string ldp_to_json(const LdpReport& rep) {
  json points = json::array();
  for (const LdpPoint& pt : rep.points)
    points.push_back({{"n", pt.n},
                      {"samples", pt.samples},
                      {"hits", pt.hits},
                      {"log_p", extended(pt.log_p)},
                      {"se", extended(pt.se)}});
  json out{{"points", std::move(points)},
           {"slope", extended(rep.slope)},
           {"slope_se", extended(rep.slope_se)},
           {"rate_lo", extended(rep.rate_lo)},
           {"rate_hi", extended(rep.rate_hi)},
           {"feasible", rep.feasible},
           {"first_empty_n", rep.first_empty_n}};
  return out.dump();
}

std::string types_to_json(const std::vector<TypesPoint>& points) {
  json arr = json::array();
  for (const TypesPoint& pt : points)
    arr.push_back({{"n", pt.n},
                   {"samples", pt.samples},
                   {"hits", pt.hits},
                   {"log_fraction", extended(pt.log_fraction)},
                   {"se", extended(pt.se)}});
  json out{{"points", std::move(arr)}};
  return out.dump();
}

std::string verblunsky_to_json(const VerblunskySeq& seq) {
  json words = json::array();
  for (const Word& w : seq.chain.words()) words.push_back(to_string(w));
  json coeffs = json::array();
  for (const CMat& c : seq.coeffs) coeffs.push_back(matrix_json(c));
  json strict = json::array();
  for (bool s : seq.strict) strict.push_back(s);
  int k = seq.coeffs.empty() ? 0 : static_cast<int>(seq.coeffs[0].cols());
  json out{{"rank", seq.chain.alphabet().rank()},
           {"k", k},
           {"words", std::move(words)},
           {"coeffs", std::move(coeffs)},
           {"strict", std::move(strict)}};
  return out.dump();
}

VerblunskySeq verblunsky_from_json(const std::string& text) {
  json j = json::parse(text);
  int rank = j.at("rank").get<int>();
  if (rank < 1)
    throw std::invalid_argument("verblunsky_from_json: rank must be >= 1");
  const json& words = j.at("words");
  if (words.empty() || !parse_word(words[0].get<std::string>(), rank).empty())
    throw std::invalid_argument(
        "verblunsky_from_json: word list must start at \"e\"");
  VerblunskySeq seq{GroundedChain(Alphabet(rank)), {}, {}};
  for (std::size_t i = 1; i < words.size(); ++i)
    seq.chain.extend(parse_word(words[i].get<std::string>(), rank));
  for (const json& c : j.at("coeffs")) seq.coeffs.push_back(matrix_parse(c));
  for (const json& s : j.at("strict")) seq.strict.push_back(s.get<bool>());
  if (seq.coeffs.size() != seq.chain.step_count() ||
      seq.strict.size() != seq.chain.step_count())
    throw std::invalid_argument(
        "verblunsky_from_json: " + std::to_string(seq.coeffs.size()) +
        " coefficients and " + std::to_string(seq.strict.size()) +
        " strict flags for " + std::to_string(seq.chain.step_count()) +
        " chain steps");
  int k = j.at("k").get<int>();
  for (std::size_t i = 0; i < seq.coeffs.size(); ++i) {
    Eigen::Index rows =
        static_cast<Eigen::Index>(seq.chain.step(i).outer.size()) * k;
    if (seq.coeffs[i].cols() != k || seq.coeffs[i].rows() != rows)
      throw std::invalid_argument(
          "verblunsky_from_json: coefficient " + std::to_string(i) +
          " is " + std::to_string(seq.coeffs[i].rows()) + "x" +
          std::to_string(seq.coeffs[i].cols()) + ", expected " +
          std::to_string(rows) + "x" + std::to_string(k));
  }
  return seq;
}

}  // namespace apent
