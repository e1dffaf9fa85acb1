#pragma once

// Umbrella header for the library (the HTTP transport lives in server.hpp).
#include "scichal/annotation.hpp"
#include "scichal/corpus.hpp"
#include "scichal/entity_linking.hpp"
#include "scichal/evaluation.hpp"
#include "scichal/index_store.hpp"
#include "scichal/ingestion.hpp"
#include "scichal/lexicon.hpp"
#include "scichal/scoring.hpp"
#include "scichal/service.hpp"
