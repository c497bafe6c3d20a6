#pragma once

#define SCARSCOPE_VERSION "0.1.0"
