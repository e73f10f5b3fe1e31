"""cranioresize HTTP 애플리케이션 파일입니다."""
import traceback

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from mangum import Mangum
import uvicorn

from cranioresize import __version__
from cranioresize.api_server import calibration_api, specimen_api
from cranioresize.customerror import CranioResizeError, StageError
from cranioresize.settings import logger


app = FastAPI(title="cranioresize", version=__version__)
app.include_router(calibration_api)
app.include_router(specimen_api)


def error_body(exc: CranioResizeError) -> dict:
    body = {"error": type(exc).__name__, "message": exc.message}
    if isinstance(exc, StageError):
        body["stage"] = exc.stage
        body["cause"] = type(exc.cause).__name__
    return body


@app.exception_handler(CranioResizeError)
async def cranioresize_exception_handler(request: Request, exc: CranioResizeError):  # pylint: disable=W0613
    logger.error(
        "%s: %s\n%s" % (type(exc).__name__, exc, "".join(traceback.format_tb(exc.__traceback__)))
        )
    return JSONResponse(error_body(exc), status_code=status.HTTP_422_UNPROCESSABLE_ENTITY)


@app.exception_handler(Exception)
async def http_exception_handler(request: Request, exc: Exception):  # pylint: disable=W0613
    # 예외 처리 시 로그 남기기
    logger.error(
        "Exception occurred: %s\n%s" % (exc, "".join(traceback.format_tb(exc.__traceback__)))
        )
    return JSONResponse(
        {"error": type(exc).__name__, "message": str(exc)},
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
    )


@app.get("/")
async def root():
    logger.info("Root endpoint accessed")
    return {"service": "cranioresize", "version": __version__}

handler = Mangum(app)


if __name__ == "__main__":
    logger.info("Starting cranioresize server")
    uvicorn.run("cranioresize.app:app", host="0.0.0.0", port=5600, reload=True)
