/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE78_OS_Command_Injection__Environment_04.java
Label Definition File: CWE78_OS_Command_Injection.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 78 CWE78_OS_Command_Injection
 * BadSource: Environment Read data from an environment variable
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: validate the argument against an allow-list before executing
 *    BadSink : exec dynamic command execution with Runtime.getRuntime().exec()
 * Flow Variant: point-flaw Data flow: if(PRIVATE_STATIC_FINAL_TRUE) and if(PRIVATE_STATIC_FINAL_FALSE)
 *
 * */

package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE78_OS_Command_Injection__Environment_04 extends AbstractTestCase
{
    private static final boolean PRIVATE_STATIC_FINAL_TRUE = true;
    private static final boolean PRIVATE_STATIC_FINAL_FALSE = false;

    public void bad() throws Throwable
    {
        String data;
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = System.getenv("ADD");
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    public void good() throws Throwable
    {
        goodG2B();
        goodB2G();
    }

    /* goodG2B() - use goodsource and badsink */
    private void goodG2B() throws Throwable
    {
        String data;
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = "foo";
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    /* goodB2G() - use badsource and goodsink */
    private void goodB2G() throws Throwable
    {
        String data;
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = System.getenv("ADD");
        }
        else
        {
            data = null;
        }
        String[] allowed = { "-l", "-a", "-la" };
                String argument = "-l";
                for (String candidate : allowed)
                {
                    if (candidate.equals(data))
                    {
                        argument = candidate;
                    }
                }
                IO.writeLine("listing with " + argument);
    }

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
