from fastapi import HTTPException, status
from pydantic import ValidationError


def to_http_error(exc: Exception, action: str) -> HTTPException:
    """Model validation failures are 422, other ValueErrors (ParameterValidationError,
    InstanceTooLargeError) are bad parameters, everything else is 500."""
    if isinstance(exc, ValidationError):
        code = status.HTTP_422_UNPROCESSABLE_ENTITY
    elif isinstance(exc, ValueError):
        code = status.HTTP_400_BAD_REQUEST
    else:
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
    return HTTPException(status_code=code, detail=f"Failed to {action}: {str(exc)}")
