#pragma once

#include "psense/detector.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"
#include "psense/eval_analogy.hpp"
#include "psense/eval_similarity.hpp"
#include "psense/lexical_graph.hpp"
#include "psense/pipeline.hpp"
#include "psense/projector.hpp"
