#pragma once

// Umbrella header.

#include "nl2sql/ast.hpp"
#include "nl2sql/decoding.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/eval.hpp"
#include "nl2sql/exec.hpp"
#include "nl2sql/feedback.hpp"
#include "nl2sql/io.hpp"
#include "nl2sql/lexer.hpp"
#include "nl2sql/parse.hpp"
#include "nl2sql/quality.hpp"
#include "nl2sql/schema.hpp"
#include "nl2sql/serialize.hpp"
#include "nl2sql/ted.hpp"
#include "nl2sql/telemetry.hpp"
#include "nl2sql/templates.hpp"
