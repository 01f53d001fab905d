#pragma once

#include <string>

#include "apent/entropy.hpp"
#include "apent/hermitian.hpp"
#include "apent/montecarlo.hpp"
#include "apent/pdf.hpp"

namespace apent {

// Complex matrices as {"rows", "cols", "data"} with data a row-major array
// of [re, im] pairs. Serialization round-trips doubles exactly.
std::string matrix_to_json(const CMat& m);
CMat matrix_from_json(const std::string& text);

// PdFunction as {"rank", "k", "radius", "kind", ...payload}: "regular" has
// no payload, "haagerup" carries per-letter "values", "mollified" carries
// "s" and the nested "base", "table" carries length-lex sorted "entries" of
// [word, matrix] pairs (one per {g, g^{-1}} pair).
std::string pdf_to_json(const PdFunction& phi);
PdFunction pdf_from_json(const std::string& text);

// Block Gram export: the matrix plus its word list and block size.
std::string block_gram_to_json(const BlockGram& G);

// Entropy reports: JSON carries the summary fields plus the row table; CSV
// has the fixed header n,seq1,seq2,avg,seward_partial,verblunsky_partial.
// Finite numbers render with %.17g (exact round-trip), minus infinity as
// "-inf" (a JSON string); an unsettled value renders as null in JSON and
// "nan" in CSV. Output is byte-deterministic.
std::string report_to_json(const EntropyReport& rep);
std::string report_to_csv(const EntropyReport& rep);

// The number rendering the CSV writers use: %.17g, with the extended values
// spelled "nan", "inf" and "-inf".
std::string num17(double x);

// Monte Carlo reports: experiment header, stats and verdicts.
std::string mcreport_to_json(const McReport& rep);

// Decay-rate reports: the grid points plus slope and bracket.
std::string ldp_to_json(const LdpReport& rep);

// Type-volume grids: one entry per point.
std::string types_to_json(const std::vector<TypesPoint>& points);

// Verblunsky coefficients along a chain, as {"rank", "k", "words", "coeffs",
// "strict"}: words start at "e" and rebuild the same chain on parsing; k is
// the block size (0 when the sequence has no steps).
std::string verblunsky_to_json(const VerblunskySeq& seq);
VerblunskySeq verblunsky_from_json(const std::string& text);

}  // namespace apent
