// Text-format front end: the concept/formula DSL, signature files and
// theory files.
//
// Concept grammar (keywords are reserved; names come from the signature):
//   or      := and ("or" or)?                     -- right associative
//   and     := unary ("and" and)?                 -- right associative
//   unary   := "not" unary | "exists" ROLE "." unary | "forall" ROLE "." unary | primary
//   primary := NAME | "(" or ")"
// Formulas:
//   formula := "bot" | "(" term "," term ")" ":" ROLE | term ":" concept | CNAME "sub" concept

#ifndef CDL_PARSER_HPP
#define CDL_PARSER_HPP

#include <string>

#include "cdl/syntax.hpp"

namespace cdl {

Concept parse_concept(const std::string& text, const Signature& sig);
Formula parse_formula(const std::string& text, const Signature& sig);
Term parse_term(const std::string& text, const Signature& sig);

// Signature file: sections "individuals:", "roles:", "concepts:",
// "variables:", each followed by whitespace-separated names; "#" comments.
Signature parse_signature_text(const std::string& text);
Signature load_signature(const std::string& path);

// Theory file: one formula per line, "#" comments, UTF-8, LF endings.
// Subsumptions populate the TBox, assertions the ABox (duplicates dropped,
// first-occurrence order kept).
Theory parse_theory_text(const std::string& text, const Signature& sig);
Theory load_theory(const std::string& path, const Signature& sig);

std::string read_file(const std::string& path);

}  // namespace cdl

#endif  // CDL_PARSER_HPP
