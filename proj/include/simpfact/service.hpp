#pragma once

#include "simpfact/service/event_log.hpp"
#include "simpfact/service/http.hpp"
#include "simpfact/service/service.hpp"
#include "simpfact/service/state.hpp"
