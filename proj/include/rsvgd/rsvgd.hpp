#pragma once

#include "rsvgd/bench.hpp"
#include "rsvgd/config.hpp"
#include "rsvgd/data.hpp"
#include "rsvgd/discrepancy.hpp"
#include "rsvgd/embedding.hpp"
#include "rsvgd/errors.hpp"
#include "rsvgd/fields.hpp"
#include "rsvgd/kernel.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/optimizer.hpp"
#include "rsvgd/parallel.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/report.hpp"
#include "rsvgd/run.hpp"
#include "rsvgd/target.hpp"
#include "rsvgd/types.hpp"
