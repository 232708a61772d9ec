#include <stdio.h>
#include <string.h>
#include <unistd.h>

#include "agdalache.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,    \
                    __LINE__, #cond);                                 \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    int64_t value = 0;
    AlHandle future[2];

    CHECK(ec_init_app() == 0);
    al_init();

    AlHandle app = ec_init_app();
    CHECK(app != 0);
    CHECK(ec_read(app, &value) == AL_OK && value == 0);
    CHECK(ec_increment(app, 4, &value) == AL_OK && value == 4);
    CHECK(ec_increment(app, 3, &value) == AL_SECOND_ODD && value == 4);
    CHECK(strcmp(al_error_message(AL_SECOND_ODD), "second parameter is odd") == 0);
    CHECK(strcmp(al_error_message(AL_FIRST_ODD), "first parameter is odd") == 0);
    CHECK(strcmp(al_error_message(999), "unknown error") == 0);

    /* Either we obtain the result and free both handles... */
    CHECK(ec_increase_async(app, 0, future) == AL_OK);
    CHECK(al_future_get_int(future, &value) == AL_OK && value == 4);
    CHECK(al_handle_free(future[0]) == AL_OK);
    CHECK(al_handle_free(future[1]) == AL_OK);

    /* ...or we interrupt through slot 0, which frees it, and free slot 1. */
    CHECK(ec_increase_async(app, 10, future) == AL_OK);
    usleep(50 * 1000);
    CHECK(al_future_try_put_interrupt(future[0]) == 1);
    value = -1;
    CHECK(al_future_get_int(future, &value) == AL_INTERRUPTED && value == -1);
    CHECK(al_handle_free(future[1]) == AL_OK);
    CHECK(al_handle_free(future[0]) == AL_STALE_HANDLE);

    CHECK(al_handle_free(app) == AL_OK);
    CHECK(al_handle_free(app) == AL_STALE_HANDLE);
    CHECK(al_handle_free(0) == AL_NULL_HANDLE);
    al_exit();
    puts("ok");
    return 0;
}
